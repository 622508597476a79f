#include "cutin/calibration.hpp"

#include "cutin/config.hpp"
#include "cutin/sim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace cutin::calibration {

namespace {

// theta = (log s_v, m_v, log s_o, m_o)
using Vec4 = Eigen::Vector4d;

Vec4 to_theta(const dbn::SigmoidParams& p) { return {std::log(p.s_v), p.m_v, std::log(p.s_o), p.m_o}; }

dbn::SigmoidParams from_theta(const Vec4& t) { return {std::exp(t[0]), t[1], std::exp(t[2]), t[3]}; }

double loss_of(const std::vector<CalibrationSample>& samples, const Vec4& theta)
{
    return sigmoid_loss(samples, from_theta(theta));
}

}  // namespace

ScenarioConfig default_sample_scenario()
{
    ScenarioConfig c;
    c.ve0 = kmh_to_ms(100);
    c.vo0 = kmh_to_ms(60);
    c.vy = -1.0;
    c.dx0 = 41.0;
    return c;
}

std::vector<CalibrationSample> generate_samples(const ScenarioConfig& config, const SampleOptions& options)
{
    config.validate();
    auto [ego, cut] = sim::initial_states(config);
    const SafetyParams params;
    const double dt = config.dt;
    auto measure = [&](const VehicleState& e, const VehicleState& c, double v_lat) {
        CalibrationSample s;
        s.v_lat = v_lat;
        s.dy0_lat = -sim::lane_intrusion(e, c, config.lane_width);
        return s;
    };

    std::vector<CalibrationSample> out;
    const auto lead_ticks = static_cast<int>(std::llround(options.lead_in / dt));
    for (int k = 0; k < lead_ticks; ++k) out.push_back(measure(ego, cut, 0.0));

    const auto horizon_ticks = static_cast<int>(std::llround(config.horizon / dt));
    const auto tail_ticks = static_cast<int>(std::llround(options.tail / dt));
    const AccelCommand cruise;
    bool window_open = options.label_start == LabelStart::motion_start;
    int after = -1;
    for (int k = 0; k <= horizon_ticks; ++k) {
        const bool complete = cut.pos_lat == 0.0 && config.dy0 != 0.0;
        // Approach velocity: negative while closing in on the ego lane.
        const double v_lat = cut.pos_lat >= ego.pos_lat ? cut.v_lat - ego.v_lat : ego.v_lat - cut.v_lat;
        CalibrationSample s = measure(ego, cut, v_lat);
        if (!window_open && s.dy0_lat <= 0.0) window_open = true;
        s.label = (window_open && !complete) ? 1.0 : 0.0;
        out.push_back(s);
        if (complete && after < 0) after = 0;
        if (after >= 0 && after++ >= tail_ticks) break;
        const auto next = sim::step(ego, cut, cruise, params, dt);
        ego = next.ego;
        cut = next.cutin;
    }
    return out;
}

std::vector<CalibrationSample> synthetic_samples(const dbn::SigmoidParams& truth, const dbn::NodeSpec& v_node,
                                                 const dbn::NodeSpec& dy0_node)
{
    std::vector<CalibrationSample> out;
    for (std::size_t i = 0; i < v_node.state_count(); ++i) {
        for (std::size_t j = 0; j < dy0_node.state_count(); ++j) {
            CalibrationSample s;
            s.v_lat = v_node.state_value(i);
            s.dy0_lat = dy0_node.state_value(j);
            s.label = dbn::le_probability(s.v_lat, s.dy0_lat, truth);
            out.push_back(s);
        }
    }
    return out;
}

double sigmoid_loss(const std::vector<CalibrationSample>& samples, const dbn::SigmoidParams& params)
{
    double sum = 0.0;
    for (const auto& s : samples) {
        const double r = dbn::le_probability(s.v_lat, s.dy0_lat, params) - s.label;
        sum += r * r;
    }
    return sum;
}

FitResult fit_sigmoid(const std::vector<CalibrationSample>& samples, const FitOptions& options)
{
    if (samples.size() < 20)
        throw std::invalid_argument("fit_sigmoid needs at least 20 samples, got " + std::to_string(samples.size()));
    bool has_low = false, has_high = false;
    const double first = samples.front().label;
    for (const auto& s : samples) {
        if (!(s.label >= 0.0 && s.label <= 1.0)) throw std::invalid_argument("fit_sigmoid: label outside [0, 1]");
        if (!std::isfinite(s.v_lat) || !std::isfinite(s.dy0_lat))
            throw std::invalid_argument("fit_sigmoid: non-finite sample");
        if (s.label != first) (s.label < first ? has_low : has_high) = true;
    }
    options.init.validate();

    FitResult result;
    result.degenerate = !has_low && !has_high;

    Vec4 theta = to_theta(options.init);
    double loss = loss_of(samples, theta);
    result.loss_history.push_back(loss);
    double lambda = options.initial_damping;

    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd J(n, 4);
    Eigen::VectorXd r(n);

    int it = 0;
    for (; it < options.max_iterations; ++it) {
        const dbn::SigmoidParams p = from_theta(theta);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            const double p1 = dbn::le_velocity_factor(s.v_lat, p);
            const double p2 = dbn::le_offset_factor(s.dy0_lat, p);
            // d/d(log s) of s/(s + e^x) is P(1-P); d/dm is -P(1-P) times the input.
            const double g1 = p1 * (1.0 - p1);
            const double g2 = p2 * (1.0 - p2);
            J(i, 0) = g1 * p2;
            J(i, 1) = -g1 * s.v_lat * p2;
            J(i, 2) = p1 * g2;
            J(i, 3) = -p1 * g2 * s.dy0_lat;
            r[i] = std::min(p1 * p2, 1.0) - s.label;
        }
        const Eigen::Matrix4d JtJ = J.transpose() * J;
        const Vec4 g = J.transpose() * r;

        bool accepted = false;
        double new_loss = loss;
        Vec4 candidate = theta;
        while (lambda < 1e16) {
            Eigen::Matrix4d A = JtJ;
            for (int d = 0; d < 4; ++d) A(d, d) += lambda * std::max(JtJ(d, d), 1e-12);
            Eigen::LDLT<Eigen::Matrix4d> ldlt(A);
            const Vec4 step = ldlt.info() == Eigen::Success ? Vec4(ldlt.solve(-g)) : Vec4::Constant(NAN);
            if (step.allFinite()) {
                candidate = theta + step;
                new_loss = loss_of(samples, candidate);
                if (std::isfinite(new_loss) && new_loss <= loss) {
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at any damping: a stationary point.
            result.converged = true;
            break;
        }
        const double change = (loss - new_loss) / std::max(loss, std::numeric_limits<double>::min());
        theta = candidate;
        loss = new_loss;
        result.loss_history.push_back(loss);
        lambda = std::max(lambda / 10.0, 1e-12);
        if (change < options.rel_tol || loss == 0.0) {
            result.converged = true;
            ++it;
            break;
        }
    }
    result.iterations = it;
    result.warning = !result.converged;
    result.params = from_theta(theta);
    result.loss = loss;
    return result;
}

void write_samples_csv(std::ostream& out, const std::vector<CalibrationSample>& samples)
{
    out << "v_lat,dy0_lat,label\n";
    char buf[96];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", s.v_lat, s.dy0_lat, s.label);
        out << buf;
    }
}

std::vector<CalibrationSample> read_samples_csv(std::istream& in)
{
    std::vector<CalibrationSample> out;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line == "v_lat,dy0_lat,label") continue;
        }
        std::istringstream row(line);
        CalibrationSample s;
        char c1 = 0, c2 = 0;
        if (!(row >> s.v_lat >> c1 >> s.dy0_lat >> c2 >> s.label) || c1 != ',' || c2 != ',')
            throw ConfigError("samples line " + std::to_string(line_no) + ": expected v_lat,dy0_lat,label");
        row >> std::ws;
        if (!row.eof()) throw ConfigError("samples line " + std::to_string(line_no) + ": trailing data");
        if (!(s.label >= 0.0 && s.label <= 1.0))
            throw ConfigError("samples line " + std::to_string(line_no) + ": label outside [0, 1]");
        out.push_back(s);
    }
    return out;
}

nlohmann::json fit_to_json(const FitResult& fit, const dbn::NetworkSpec& base)
{
    dbn::NetworkSpec spec = base;
    spec.sigmoid = fit.params;
    return to_json(spec);
}

}  // namespace cutin::calibration
