#include "cutin/registry.hpp"
#include "cutin/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace cutin;

namespace {

VehicleState at(double x, double y, double v = 0.0)
{
    VehicleState s;
    s.pos_long = x;
    s.pos_lat = y;
    s.v_long = v;
    return s;
}

// Two points at constant speed, stepped at dt until the rear one reaches the
// front one. Returns the elapsed time, or a negative value if it never does.
double brute_force_contact(double gap, double v_rel, double dt, double limit)
{
    double t = 0.0;
    double d = gap;
    while (t <= limit) {
        if (d <= 0.0) return t;
        d -= v_rel * dt;
        t += dt;
    }
    return -1.0;
}

// Cruise-only model to drive scenarios without intervention.
class Passive : public SafetyModel {
public:
    std::string_view id() const override { return "passive"; }
    ModelDecision safety_check(const Observation&) override { return {}; }
    AccelCommand react(const ModelDecision&, const Observation&, const SafetyParams&) override { return {}; }
    void reset() override {}
    std::unique_ptr<SafetyModel> clone() const override { return std::make_unique<Passive>(); }
};

// Always brakes at full force.
class Panic : public Passive {
public:
    AccelCommand react(const ModelDecision&, const Observation&, const SafetyParams& p) override
    {
        return {-p.cc_max_deceleration, Mode::brake, std::nullopt};
    }
};

}  // namespace

TEST(Step, JerkLimitedFirstTick)
{
    const SafetyParams p;
    VehicleState ego = at(0, 0, 25.0);
    const auto out = sim::step(ego, at(50, 3.5, 2.78), {-p.cc_max_deceleration, Mode::brake, std::nullopt}, p, 0.1);
    EXPECT_NEAR(out.ego.a_long, -1.265, 1e-12);
    EXPECT_NEAR(out.ego.v_long, 25.0 - 0.1265, 1e-12);
    // Position uses the updated velocity.
    EXPECT_NEAR(out.ego.pos_long, 0.1 * (25.0 - 0.1265), 1e-12);
}

TEST(Step, CruiseOnlyAdvancesPositions)
{
    const SafetyParams p;
    VehicleState ego = at(3.0, 0.0, 20.0);
    VehicleState cut = at(40.0, 3.5, 5.0);
    const auto out = sim::step(ego, cut, {}, p, 0.1);
    EXPECT_DOUBLE_EQ(out.ego.pos_long, 5.0);
    EXPECT_DOUBLE_EQ(out.ego.v_long, 20.0);
    EXPECT_DOUBLE_EQ(out.ego.a_long, 0.0);
    EXPECT_DOUBLE_EQ(out.cutin.pos_long, 40.5);
    EXPECT_DOUBLE_EQ(out.cutin.pos_lat, 3.5);
    EXPECT_EQ(out.clamp_events, 0);
}

TEST(Step, LateralMotionStopsAtLaneCenter)
{
    const SafetyParams p;
    VehicleState ego = at(0, 0, 20.0);
    VehicleState cut = at(40.0, 3.5, 20.0);
    cut.v_lat = -1.0;
    for (int k = 1; k <= 50; ++k) {
        const auto out = sim::step(ego, cut, {}, p, 0.1);
        ego = out.ego;
        cut = out.cutin;
        if (k < 35) {
            EXPECT_GT(cut.pos_lat, 0.0) << "tick " << k;
            EXPECT_EQ(cut.v_lat, -1.0);
        } else {
            EXPECT_EQ(cut.pos_lat, 0.0) << "tick " << k;
            EXPECT_EQ(cut.v_lat, 0.0);
        }
    }
}

TEST(Step, ClampsOutOfRangeTargetsAndCountsThem)
{
    const SafetyParams p;
    VehicleState ego = at(0, 0, 10.0);
    ego.a_long = -p.cc_max_deceleration;
    const auto out = sim::step(ego, at(50, 3.5), {-100.0, Mode::brake, std::nullopt}, p, 0.1);
    EXPECT_DOUBLE_EQ(out.ego.a_long, -p.cc_max_deceleration);
    EXPECT_GE(out.clamp_events, 1);

    const auto nan = sim::step(at(0, 0, 10.0), at(50, 3.5), {std::nan(""), Mode::cruise, std::nullopt}, p, 0.1);
    EXPECT_DOUBLE_EQ(nan.ego.a_long, 0.0);
    EXPECT_GE(nan.clamp_events, 1);
}

TEST(Step, SpeedNeverNegative)
{
    const SafetyParams p;
    VehicleState ego = at(0, 0, 0.05);
    ego.a_long = -p.cc_max_deceleration;
    const auto out = sim::step(ego, at(50, 3.5), {-p.cc_max_deceleration, Mode::brake, std::nullopt}, p, 0.1);
    EXPECT_EQ(out.ego.v_long, 0.0);
}

TEST(Step, TighterJerkLimitFromCommand)
{
    const SafetyParams p;
    const auto out = sim::step(at(0, 0, 25.0), at(50, 3.5), {-7.0, Mode::brake, 5.0}, p, 0.1);
    EXPECT_NEAR(out.ego.a_long, -0.5, 1e-12);
}

TEST(Crash, Examples)
{
    EXPECT_TRUE(sim::detect_crash(at(10, 1), at(10, 1)));
    EXPECT_FALSE(sim::detect_crash(at(0, 0), at(10, 0)));
    EXPECT_TRUE(sim::detect_crash(at(0, 0), at(4.4, 1.0)));
    // Touching edges are not an overlap.
    EXPECT_FALSE(sim::detect_crash(at(0, 0), at(4.5, 0)));
    EXPECT_FALSE(sim::detect_crash(at(0, 0), at(0, 1.8)));
}

TEST(Crash, SymmetryAndRectangleOracle)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> x(-10, 10), y(-4, 4), dim(1.0, 6.0);
    for (int i = 0; i < 10000; ++i) {
        VehicleState a = at(x(rng), y(rng)), b = at(x(rng), y(rng));
        a.length = dim(rng);
        b.length = dim(rng);
        a.width = dim(rng) / 2;
        b.width = dim(rng) / 2;
        // Interval overlap written out per edge.
        const bool ox = a.pos_long - a.length / 2 < b.pos_long + b.length / 2 &&
                        b.pos_long - b.length / 2 < a.pos_long + a.length / 2;
        const bool oy = a.pos_lat - a.width / 2 < b.pos_lat + b.width / 2 &&
                        b.pos_lat - b.width / 2 < a.pos_lat + a.width / 2;
        ASSERT_EQ(sim::detect_crash(a, b), ox && oy);
        ASSERT_EQ(sim::detect_crash(a, b), sim::detect_crash(b, a));
    }
}

TEST(Ttc, Examples)
{
    EXPECT_DOUBLE_EQ(*sim::compute_ttc(30.0, 15.0), 2.0);
    EXPECT_FALSE(sim::compute_ttc(30.0, -5.0).has_value());
    EXPECT_FALSE(sim::compute_ttc(30.0, 0.0).has_value());
    EXPECT_NEAR(*sim::compute_ttc(41.0 - 4.5, 25.0 - 2.78), 1.643, 5e-4);
    EXPECT_EQ(*sim::compute_ttc(-1.0, 3.0), 0.0);
}

TEST(Ttc, AgreesWithForwardSimulation)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> gap(0.1, 80.0), vr(0.5, 30.0);
    const double dt = 0.1;
    for (int i = 0; i < 1000; ++i) {
        const double g = gap(rng), v = vr(rng);
        const double brute = brute_force_contact(g, v, dt, 1000.0);
        ASSERT_GE(brute, 0.0);
        const double ttc = *sim::compute_ttc(g, v);
        ASSERT_LE(std::abs(ttc - brute), dt + 1e-9) << "gap " << g << " v_rel " << v;
    }
}

TEST(Geometry, GapClearanceIntrusion)
{
    const VehicleState ego = at(0, 0);
    const VehicleState cut = at(41, 3.5);
    EXPECT_DOUBLE_EQ(sim::bumper_gap(ego, cut), 36.5);
    EXPECT_NEAR(sim::lateral_clearance(ego, cut), 1.7, 1e-12);
    // Near edge at 2.6 m, marking at 1.75 m: 0.85 m outside.
    EXPECT_NEAR(sim::lane_intrusion(ego, cut, 3.5), -0.85, 1e-12);
    EXPECT_NEAR(sim::lane_intrusion(ego, at(41, 2.25), 3.5), 0.4, 1e-12);
    EXPECT_TRUE(sim::cutin_ahead(ego, cut));
    EXPECT_FALSE(sim::cutin_ahead(cut, ego));
}

TEST(RunScenario, CutInAlreadyInLaneAtEqualSpeed)
{
    ScenarioConfig c;
    c.dy0 = 0.0;
    c.ve0 = 20.0;
    c.vo0 = 20.0;
    c.vy = 0.0;
    c.dx0 = 30.0;
    Passive model;
    const auto trace = sim::run_scenario(c, model, {});
    EXPECT_FALSE(trace.crash);
    EXPECT_FALSE(trace.crash_time.has_value());
    EXPECT_FALSE(trace.min_ttc.has_value());
}

TEST(RunScenario, TickTimesAndCrashBookkeeping)
{
    ScenarioConfig c;  // 25 -> 2.78 m/s at 41 m, nobody brakes
    Passive model;
    const auto trace = sim::run_scenario(c, model, {});
    ASSERT_TRUE(trace.crash);
    ASSERT_TRUE(trace.crash_time.has_value());
    EXPECT_DOUBLE_EQ(*trace.crash_time, trace.ticks.back().time);
    for (std::size_t k = 1; k < trace.ticks.size(); ++k)
        EXPECT_NEAR(trace.ticks[k].time - trace.ticks[k - 1].time, c.dt, 1e-12);
    EXPECT_TRUE(sim::detect_crash(trace.ticks.back().ego, trace.ticks.back().cutin));
}

TEST(RunScenario, DeterministicAndBounded)
{
    const SafetyParams p;
    ScenarioConfig c;
    c.ve0 = kmh_to_ms(90);
    c.vo0 = kmh_to_ms(10);
    c.vy = -1.7;
    for (const auto& id : known_model_ids()) {
        auto m1 = make_model(id, p);
        auto m2 = make_model(id, p);
        const auto a = sim::run_scenario(c, *m1, p);
        const auto b = sim::run_scenario(c, *m2, p);
        std::ostringstream sa, sb;
        sim::write_trace_csv(sa, a);
        sim::write_trace_csv(sb, b);
        EXPECT_EQ(sa.str(), sb.str()) << id;
        EXPECT_LE(a.max_abs_jerk(), p.cc_min_jerk + 1e-9) << id;
        EXPECT_LE(a.max_decel(), p.cc_max_deceleration + 1e-9) << id;
    }
}

TEST(RunScenario, SpeedNonIncreasingWhileBraking)
{
    const SafetyParams p;
    ScenarioConfig c;
    c.ve0 = kmh_to_ms(70);
    c.vo0 = kmh_to_ms(10);
    c.vy = -1.0;
    c.dx0 = 80;
    for (const auto& id : known_model_ids()) {
        auto m = make_model(id, p);
        const auto trace = sim::run_scenario(c, *m, p);
        bool braking = false;
        for (std::size_t k = 1; k < trace.ticks.size(); ++k) {
            const auto& prev = trace.ticks[k - 1];
            if (prev.command.mode == Mode::brake) braking = true;
            if (braking && prev.command.mode != Mode::brake) break;
            if (braking) {
                EXPECT_LE(trace.ticks[k].ego.v_long, prev.ego.v_long + 1e-12) << id << " tick " << k;
            }
        }
    }
}

TEST(RunScenario, SettlesAfterLaneChange)
{
    ScenarioConfig c;
    c.ve0 = 10.0;
    c.vo0 = 12.0;
    c.vy = -2.0;
    c.dx0 = 30.0;
    Passive model;
    const auto trace = sim::run_scenario(c, model, {});
    EXPECT_FALSE(trace.crash);
    // Lane change takes 1.75 s; the episode ends 5 s later, well before 15 s.
    EXPECT_LT(trace.ticks.back().time, 7.5);
    EXPECT_GT(trace.ticks.back().time, 6.5);
}

TEST(RunScenario, PanicBrakingStaysInsideEnvelope)
{
    const SafetyParams p;
    ScenarioConfig c;
    c.dx0 = 90;
    Panic model;
    const auto trace = sim::run_scenario(c, model, p);
    EXPECT_LE(trace.max_abs_jerk(), p.cc_min_jerk + 1e-9);
    EXPECT_NEAR(trace.max_decel(), p.cc_max_deceleration, 1e-9);
    EXPECT_EQ(*trace.first_decel_time(), 0.1);
}

TEST(TraceCsv, HeaderAndRows)
{
    ScenarioConfig c;
    c.horizon = 0.3;
    Passive model;
    const auto trace = sim::run_scenario(c, model, {});
    std::ostringstream out;
    sim::write_trace_csv(out, trace);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,ego_x,ego_y,ego_v,ego_a,cut_x,cut_y,cut_v,ttc,mode,decision");
    std::getline(in, line);
    EXPECT_EQ(line, "0.00,0.0000,0.0000,25.0000,0.0000,41.0000,3.5000,2.7800,,cruise,safe");
}

TEST(Config, ValidationNamesField)
{
    ScenarioConfig c;
    c.dx0 = -1.0;
    try {
        c.validate();
        FAIL() << "expected invalid_argument";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("dx0"), std::string::npos);
    }
    SafetyParams p;
    p.cc_rt = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
