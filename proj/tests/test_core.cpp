#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "paramosc/core.hpp"

using namespace paramosc;

TEST(DriveParams, RatioRoundTrip) {
    const auto p = DriveParams::from_ratio(0.03, 0.6, 300);
    EXPECT_NEAR(p.eps_bar(), 0.018, 1e-17);
    EXPECT_NEAR(p.ratio(), 0.6, 1e-15);
    const auto q = DriveParams::from_eps_bar(0.03, 0.018, 300);
    EXPECT_NEAR(q.ratio(), 0.6, 1e-15);
}

TEST(DriveParams, Validation) {
    EXPECT_THROW(DriveParams::from_eps_bar(-0.01, 0.0, 10), InvalidParameter);
    EXPECT_THROW(DriveParams::from_eps_bar(1.0, 0.0, 10), InvalidParameter);
    EXPECT_THROW(DriveParams::from_eps_bar(0.1, 0.0, 0), InvalidParameter);
    EXPECT_THROW(DriveParams::from_eps_bar(0.1, -2.0, 10), InvalidParameter);
    EXPECT_THROW(DriveParams::from_eps_bar(0.1, NAN, 10), InvalidParameter);
    EXPECT_THROW(DriveParams::from_ratio(0.1, INFINITY, 10), InvalidParameter);
    EXPECT_NO_THROW(DriveParams::from_eps_bar(0.0, 0.0, 1));
    EXPECT_NO_THROW(DriveParams::from_eps_bar(0.999, 0.0, 1));
}

TEST(DriveParams, RatioUndefinedAtZeroAmplitude) {
    const auto p = DriveParams::from_eps_bar(0.0, 0.1, 10);
    EXPECT_THROW(p.ratio(), UndefinedRatio);
    EXPECT_EQ(error_kind(UndefinedRatio("x")), "UndefinedRatio");
}

TEST(Drive, TauFinalGolden) {
    const auto p = DriveParams::from_eps_bar(0.03, 0.018, 300);
    EXPECT_NEAR(tau_final(p), 467.0355778379276370, 1e-11);
    EXPECT_NEAR(tau_final(DriveParams::from_eps_bar(0.0, 0.0, 2)), std::numbers::pi, 1e-15);
}

TEST(Drive, WindowIsExact) {
    const auto p = DriveParams::from_eps_bar(0.5, 0.0, 3);
    const double tf = tau_final(p);
    EXPECT_EQ(g_eval(p, 0.0), 1.0);
    EXPECT_EQ(g_eval(p, -1.0), 1.0);
    EXPECT_EQ(g_eval(p, tf), 1.0);
    EXPECT_EQ(g_eval(p, tf + 5.0), 1.0);
    EXPECT_NEAR(g_eval(p, std::numbers::pi / 4), 1.5, 1e-15);
    EXPECT_NEAR(g_eval(p, 3 * std::numbers::pi / 4), 0.5, 1e-15);
}

TEST(GroundState, Normalized) {
    const auto s = ground_state();
    EXPECT_NEAR(s.a.real(), 0.7511255444649424829, 1e-16);
    EXPECT_EQ(s.b, cplx(0.5, 0.0));
    EXPECT_LT(norm_residual(s), 1e-15);
}

TEST(SimConfig, Validation) {
    SimConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n_max = 3;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = SimConfig{};
    c.abs_tol = 0;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = SimConfig{};
    c.n_max_cap = 100;
    EXPECT_THROW(c.validate(), InvalidParameter);
}
