#include "common.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace equistop {
namespace {

TEST(BuildGrid, TruncatedHalfLine) {
    auto g = build_grid(StateInterval::positive_half_line(), 500, std::pair{0.1, 50.0});
    ASSERT_EQ(g->size(), 500u);
    EXPECT_DOUBLE_EQ(g->front(), 0.1);
    EXPECT_DOUBLE_EQ(g->back(), 50.0);
    EXPECT_NEAR(g->spacing(), 49.9 / 499.0, 1e-15);
    for (std::size_t i = 1; i < g->size(); ++i)
        EXPECT_NEAR((*g)[i] - (*g)[i - 1], g->spacing(), 1e-12);
}

TEST(BuildGrid, ThreePointsOnUnitInterval) {
    auto g = build_grid(StateInterval(0.0, 1.0), 3, std::pair{0.25, 0.75});
    ASSERT_EQ(g->size(), 3u);
    EXPECT_DOUBLE_EQ((*g)[0], 0.25);
    EXPECT_DOUBLE_EQ((*g)[1], 0.5);
    EXPECT_DOUBLE_EQ((*g)[2], 0.75);
    EXPECT_DOUBLE_EQ(g->spacing(), 0.25);
}

TEST(BuildGrid, RejectsUnboundedWithoutTruncation) {
    EXPECT_THROW(build_grid(StateInterval::positive_half_line(), 100), InvalidInput);
}

TEST(BuildGrid, RejectsTruncationOutsideInterval) {
    EXPECT_THROW(build_grid(StateInterval::positive_half_line(), 10, std::pair{0.0, 5.0}),
                 InvalidInput);
    EXPECT_THROW(build_grid(StateInterval(0.0, 1.0), 10, std::pair{0.5, 1.0}), InvalidInput);
    EXPECT_THROW(build_grid(StateInterval(0.0, 1.0), 10, std::pair{0.6, 0.4}), InvalidInput);
    EXPECT_THROW(build_grid(StateInterval(0.0, 1.0), 2, std::pair{0.2, 0.4}), InvalidInput);
}

TEST(BuildGrid, BoundedIntervalIsStrictlyInterior) {
    auto g = build_grid(StateInterval(0.0, 1.0), 9);
    EXPECT_GT(g->front(), 0.0);
    EXPECT_LT(g->back(), 1.0);
    EXPECT_NEAR(g->spacing(), 0.1, 1e-15);
}

GridPolicy from_string(const std::string& s) {
    auto g = build_grid(StateInterval(0.0, 1.0), static_cast<int>(s.size()));
    std::vector<bool> mask;
    for (char c : s) mask.push_back(c == 'T');
    return GridPolicy(g, mask);
}

TEST(DecomposeComplement, InteriorRun) {
    const auto d = decompose_complement(from_string("TTFFFTT"));
    ASSERT_EQ(d.components.size(), 1u);
    const Component& c = d.components[0];
    EXPECT_EQ(c.first, 2u);
    EXPECT_EQ(c.last, 4u);
    EXPECT_EQ(c.left, 1u);
    EXPECT_EQ(c.right, 5u);
}

TEST(DecomposeComplement, AllTrueHasNoComponents) {
    EXPECT_TRUE(decompose_complement(from_string("TTTT")).components.empty());
}

TEST(DecomposeComplement, AllFalseReachesBothBoundaries) {
    const auto d = decompose_complement(from_string("FFFF"));
    ASSERT_EQ(d.components.size(), 1u);
    EXPECT_FALSE(d.components[0].left.has_value());
    EXPECT_FALSE(d.components[0].right.has_value());
    EXPECT_EQ(d.components[0].first, 0u);
    EXPECT_EQ(d.components[0].last, 3u);
}

TEST(DecomposeComplement, RoundTripOnRandomMasks) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        const double p = (trial % 5) / 4.0;
        auto g = build_grid(StateInterval(0.0, 1.0), static_cast<int>(std::max<std::size_t>(n, 3)));
        GridPolicy policy(g, testing::random_mask(rng, g->size(), p));
        const auto d = decompose_complement(policy);
        EXPECT_EQ(reassemble(d), policy.mask());
        for (const Component& c : d.components) {
            if (c.left) EXPECT_TRUE(policy[*c.left]);
            if (c.right) EXPECT_TRUE(policy[*c.right]);
            for (std::size_t i = c.first; i <= c.last; ++i) EXPECT_FALSE(policy[i]);
        }
    }
}

TEST(GridPolicy, ClosedSetMembership) {
    const GridPolicy p = from_string("TTFFFTT");
    const auto& g = p.grid();
    EXPECT_TRUE(p.contains_state(g[0] / 2));  // below the grid, first entry true
    EXPECT_TRUE(p.contains_state(0.5 * (g[0] + g[1])));
    EXPECT_TRUE(p.contains_state(g[1]));
    EXPECT_FALSE(p.contains_state(0.5 * (g[1] + g[2])));
    EXPECT_FALSE(p.contains_state(g[3]));
    EXPECT_TRUE(p.contains_state(g[5]));
    EXPECT_TRUE(p.contains_state(g.back() + 0.01));
}

TEST(GridPolicy, LowerSetAndThreshold) {
    auto g = testing::benchmark_grid();
    const GridPolicy p = GridPolicy::lower_set(g, 6.0);
    ASSERT_TRUE(p.lower_threshold().has_value());
    EXPECT_LE(*p.lower_threshold(), 6.0);
    EXPECT_GT(*p.lower_threshold() + g->spacing(), 6.0);
    EXPECT_FALSE(GridPolicy::empty(g).lower_threshold().has_value());
    EXPECT_TRUE(GridPolicy::full(g).includes(p));
    EXPECT_FALSE(p.includes(GridPolicy::full(g)));
}

TEST(GridPolicy, PayoffSupportIsBelowStrike) {
    auto g = testing::benchmark_grid();
    const auto p = GridPolicy::payoff_support(g, Objective::put(0.05, 0.5, 10.0));
    for (std::size_t i = 0; i < g->size(); ++i) EXPECT_EQ(p[i], (*g)[i] < 10.0);
}

TEST(GridPolicy, RejectsMaskOfWrongLength) {
    auto g = build_grid(StateInterval(0.0, 1.0), 5);
    EXPECT_THROW(GridPolicy(g, std::vector<bool>(4, true)), InvalidInput);
}

TEST(PriorFamily, VolBandAxisAndCoefficients) {
    const auto f = PriorFamily::gbm_vol_band(0.05, {0.2, 0.4}, 17);
    const auto axis = f.axis(0);
    ASSERT_EQ(axis.size(), 17u);
    EXPECT_DOUBLE_EQ(axis.front(), 0.2);
    EXPECT_DOUBLE_EQ(axis.back(), 0.4);
    const double theta[] = {0.3};
    const auto c = f.coefficients(theta, 2.0);
    EXPECT_DOUBLE_EQ(c.drift, 0.1);
    EXPECT_DOUBLE_EQ(c.vol, 0.6);
    EXPECT_DOUBLE_EQ(f.discount(theta, 0.05), 0.05);
}

TEST(PriorFamily, RateBandCarriesDiscount) {
    const auto f = PriorFamily::gbm_vol_and_rate_band({0.2, 0.4}, {0.03, 0.07}, 5);
    EXPECT_EQ(f.dimension(), 2u);
    EXPECT_EQ(f.sample_grid().size(), 25u);
    const double theta[] = {0.3, 0.04};
    EXPECT_DOUBLE_EQ(f.discount(theta, 0.05), 0.04);
    EXPECT_DOUBLE_EQ(f.coefficients(theta, 2.0).drift, 0.08);
}

TEST(PriorFamily, DegenerateRangeIsOnePoint) {
    const auto f = PriorFamily::gbm_vol_band(0.05, {0.3, 0.3}, 17);
    EXPECT_EQ(f.sample_grid().size(), 1u);
}

TEST(Objective, PutPayoff) {
    const auto o = Objective::put(0.05, 0.5, 10.0);
    EXPECT_DOUBLE_EQ(o.payoff(4.0), 6.0);
    EXPECT_DOUBLE_EQ(o.payoff(12.0), 0.0);
    EXPECT_DOUBLE_EQ(o.with_alpha(1.0).alpha(), 1.0);
    EXPECT_THROW(Objective::put(0.05, 1.5, 10.0), InvalidInput);
    EXPECT_THROW(Objective::put(-0.05, 0.5, 10.0), InvalidInput);
}

}  // namespace
}  // namespace equistop
