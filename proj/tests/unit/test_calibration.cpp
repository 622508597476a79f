#include "cutin/calibration.hpp"
#include "cutin/config.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace cutin;
using namespace cutin::calibration;

TEST(Samples, LabelWindowFollowsTheLaneChange)
{
    const auto samples = generate_samples();
    ASSERT_GT(samples.size(), 30u);
    // One second of parallel driving first.
    for (int k = 0; k < 10; ++k) {
        EXPECT_EQ(samples[k].v_lat, 0.0);
        EXPECT_EQ(samples[k].label, 0.0);
    }
    bool seen_positive = false;
    for (const auto& s : samples) {
        if (s.label == 1.0) {
            seen_positive = true;
            EXPECT_LE(s.dy0_lat, 1e-9);
            EXPECT_LT(s.v_lat, 0.0);
        }
        if (s.label == 0.0 && s.v_lat < 0.0) {
            EXPECT_GT(s.dy0_lat, 0.0);
        }
    }
    EXPECT_TRUE(seen_positive);
    EXPECT_EQ(samples.back().label, 0.0);

    SampleOptions early;
    early.label_start = LabelStart::motion_start;
    const auto from_motion = generate_samples(default_sample_scenario(), early);
    EXPECT_EQ(from_motion[10].label, 1.0);
}

TEST(Fit, RecoversKnownConstants)
{
    const dbn::NetworkSpec net;
    const dbn::SigmoidParams truth;
    const auto samples = synthetic_samples(truth, net.v_real, net.dy0_real);
    EXPECT_EQ(samples.size(), 25u * 41u);
    const auto fit = fit_sigmoid(samples);
    EXPECT_TRUE(fit.converged);
    EXPECT_FALSE(fit.degenerate);
    EXPECT_NEAR(fit.params.s_v, truth.s_v, 1e-3);
    EXPECT_NEAR(fit.params.m_v, truth.m_v, 1e-3);
    EXPECT_NEAR(fit.params.s_o, truth.s_o, 1e-3);
    EXPECT_NEAR(fit.params.m_o, truth.m_o, 1e-3);
}

TEST(Fit, RoundTripOnRandomTruths)
{
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> s(0.05, 5.0), m(1.0, 10.0);
    const dbn::NetworkSpec net;
    for (int i = 0; i < 5; ++i) {
        const dbn::SigmoidParams truth{s(rng), m(rng), s(rng), m(rng)};
        const auto fit = fit_sigmoid(synthetic_samples(truth, net.v_real, net.dy0_real));
        EXPECT_LT(fit.loss, 1e-12) << i;
        EXPECT_NEAR(fit.params.m_v, truth.m_v, 1e-3) << i;
        EXPECT_NEAR(fit.params.m_o, truth.m_o, 1e-3) << i;
        EXPECT_NEAR(fit.params.s_v, truth.s_v, 1e-3 * std::max(1.0, truth.s_v)) << i;
        EXPECT_NEAR(fit.params.s_o, truth.s_o, 1e-3 * std::max(1.0, truth.s_o)) << i;
    }
}

TEST(Fit, LossHistoryIsMonotone)
{
    const auto fit = fit_sigmoid(generate_samples());
    ASSERT_GE(fit.loss_history.size(), 2u);
    for (std::size_t i = 1; i < fit.loss_history.size(); ++i)
        EXPECT_LE(fit.loss_history[i], fit.loss_history[i - 1]);
    EXPECT_LT(fit.loss_history.back(), fit.loss_history.front());
}

TEST(Fit, DegenerateAndInvalidInputs)
{
    std::vector<CalibrationSample> zeros(40);
    for (std::size_t i = 0; i < zeros.size(); ++i) zeros[i].v_lat = -0.05 * static_cast<double>(i);
    const auto fit = fit_sigmoid(zeros);
    EXPECT_TRUE(fit.degenerate);
    EXPECT_THROW(fit_sigmoid(std::vector<CalibrationSample>(5)), std::invalid_argument);
    zeros[3].label = 1.5;
    EXPECT_THROW(fit_sigmoid(zeros), std::invalid_argument);
}

TEST(SamplesCsv, RoundTripAndErrors)
{
    const auto samples = generate_samples();
    std::stringstream io;
    write_samples_csv(io, samples);
    const auto back = read_samples_csv(io);
    ASSERT_EQ(back.size(), samples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_NEAR(back[i].dy0_lat, samples[i].dy0_lat, 1e-6);
        EXPECT_EQ(back[i].label, samples[i].label);
    }
    std::istringstream bad("v_lat,dy0_lat,label\n0.1,0.2\n");
    EXPECT_THROW(read_samples_csv(bad), ConfigError);
    std::istringstream range("0.1,0.2,3\n");
    EXPECT_THROW(read_samples_csv(range), ConfigError);
}

TEST(FitJson, IsALoadableNetwork)
{
    FitResult fit;
    fit.params = {0.5, 4.0, 2.0, 6.0};
    const auto net = network_from_json(fit_to_json(fit));
    EXPECT_EQ(net.sigmoid.s_v, 0.5);
    EXPECT_EQ(net.sigmoid.m_o, 6.0);
    EXPECT_EQ(net.window, dbn::NetworkSpec{}.window);
}
