#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rrank/errors.hpp"
#include "rrank/loss/loss.hpp"
#include "rrank/rng.hpp"

using namespace rrank;

namespace {

constexpr double kEps = 1e-7;

VecX simplex_point(Rng& rng, int n) {
    VecX v(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        v[i] = 0.05 + rng.uniform();
        sum += v[i];
    }
    return v / sum;
}

}  // namespace

TEST_CASE("accuracy_loss") {
    SUBCASE("near-perfect prediction is near zero") {
        VecX y(3), p(3);
        y << 1, 0, 0;
        p << 1.0 - 2.0 * kEps, kEps, kEps;
        const double loss = accuracy_loss(y, p, kEps);
        CHECK(loss >= 0.0);
        CHECK(loss <= 4.0 * kEps * std::abs(std::log(kEps)));
    }
    SUBCASE("hand value: uniform binary prediction") {
        VecX y(2), p(2);
        y << 1, 0;
        p << 0.5, 0.5;
        CHECK(accuracy_loss(y, p, kEps) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("non-one-hot labels rejected") {
        VecX bad(3), p(3);
        bad << 1, 1, 0;
        p << 0.5, 0.25, 0.25;
        CHECK_THROWS_AS(accuracy_loss(bad, p, kEps), DataError);
        bad << 0.5, 0.5, 0;
        CHECK_THROWS_AS(accuracy_loss(bad, p, kEps), DataError);
    }
    SUBCASE("gradient matches central differences on random simplex points") {
        Rng rng(2);
        for (int trial = 0; trial < 50; ++trial) {
            const int l = trial % 2 == 0 ? 3 : 5;
            VecX y = VecX::Zero(l);
            y[static_cast<int>(rng.below(static_cast<std::uint64_t>(l)))] = 1.0;
            const VecX p = simplex_point(rng, l);
            VecX grad;
            accuracy_loss(y, p, kEps, &grad);
            const VecX numeric = oracle::finite_difference_gradient(
                [&](const VecX& x) { return accuracy_loss(y, x, kEps); }, p, 1e-7);
            CHECK(oracle::max_relative_error(grad, numeric) < 1e-6);
        }
    }
}

TEST_CASE("kl_div") {
    SUBCASE("zero on equal inputs") {
        VecX a(2);
        a << 0.3, 0.7;
        CHECK(kl_div(a, a, kEps) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("closed-form hand values") {
        VecX a(2), b(2);
        a << 0.75, 0.25;
        b << 0.25, 0.75;
        CHECK(kl_div(a, b, kEps) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-10));

        a << 0.9, 0.1;
        b << 0.5, 0.5;
        const double forward = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
        const double reverse = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(5.0);
        CHECK(kl_div(a, b, kEps) == doctest::Approx(forward).epsilon(1e-10));
        CHECK(kl_div(b, a, kEps) == doctest::Approx(reverse).epsilon(1e-10));
        CHECK(kl_div(a, b, kEps) != kl_div(b, a, kEps));  // asymmetric
    }
    SUBCASE("non-negative on random pairs") {
        Rng rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            const VecX a = simplex_point(rng, 3), b = simplex_point(rng, 3);
            CHECK(kl_div(a, b, kEps) >= 0.0);
        }
    }
    SUBCASE("extreme inputs stay finite thanks to the clamp") {
        VecX a(3), b(3);
        a << 1.0, 0.0, 0.0;
        b << 0.0, 0.0, 1.0;
        CHECK(std::isfinite(kl_div(a, b, kEps)));
    }
    SUBCASE("dimension mismatch rejected") {
        CHECK_THROWS_AS(kl_div(VecX::Ones(2) / 2, VecX::Ones(3) / 3, kEps), DataError);
    }
    SUBCASE("gradients match central differences") {
        Rng rng(7);
        for (int trial = 0; trial < 30; ++trial) {
            const VecX a = simplex_point(rng, 3), b = simplex_point(rng, 3);
            VecX ga, gb;
            kl_div(a, b, kEps, &ga, &gb);
            const VecX na = oracle::finite_difference_gradient(
                [&](const VecX& x) { return kl_div(x, b, kEps); }, a, 1e-6);
            const VecX nb = oracle::finite_difference_gradient(
                [&](const VecX& x) { return kl_div(a, x, kEps); }, b, 1e-6);
            CHECK(oracle::max_relative_error(ga, na, 1e-6) < 1e-5);
            CHECK(oracle::max_relative_error(gb, nb, 1e-6) < 1e-5);
        }
    }
}

TEST_CASE("js_div") {
    SUBCASE("zero on equal, hand value on the mirrored pair") {
        VecX a(2), b(2);
        a << 0.75, 0.25;
        b << 0.25, 0.75;
        CHECK(js_div(a, a, kEps) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(js_div(a, b, kEps) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-10));
    }
    SUBCASE("exact symmetry on 1000 random pairs") {
        Rng rng(9);
        for (int trial = 0; trial < 1000; ++trial) {
            const int l = trial % 2 == 0 ? 3 : 5;
            const VecX a = simplex_point(rng, l), b = simplex_point(rng, l);
            const double ab = js_div(a, b, kEps);
            const double ba = js_div(b, a, kEps);
            CHECK(ab == ba);  // bitwise
            CHECK(ab >= 0.0);
        }
    }
    SUBCASE("gradients match central differences") {
        Rng rng(13);
        for (int trial = 0; trial < 30; ++trial) {
            const VecX a = simplex_point(rng, 5), b = simplex_point(rng, 5);
            VecX ga, gb;
            js_div(a, b, kEps, &ga, &gb);
            const VecX na = oracle::finite_difference_gradient(
                [&](const VecX& x) { return js_div(x, b, kEps); }, a, 1e-6);
            const VecX nb = oracle::finite_difference_gradient(
                [&](const VecX& x) { return js_div(a, x, kEps); }, b, 1e-6);
            CHECK(oracle::max_relative_error(ga, na, 1e-6) < 1e-5);
            CHECK(oracle::max_relative_error(gb, nb, 1e-6) < 1e-5);
        }
    }
    SUBCASE("midpoint variant: symmetric, bounded by log 2, gradient checked") {
        Rng rng(17);
        for (int trial = 0; trial < 30; ++trial) {
            const VecX a = simplex_point(rng, 3), b = simplex_point(rng, 3);
            const double v = js_div_midpoint(a, b, kEps);
            CHECK(v == js_div_midpoint(b, a, kEps));
            CHECK(v >= 0.0);
            CHECK(v <= std::log(2.0) + 1e-12);
            VecX ga, gb;
            js_div_midpoint(a, b, kEps, &ga, &gb);
            const VecX na = oracle::finite_difference_gradient(
                [&](const VecX& x) { return js_div_midpoint(x, b, kEps); }, a, 1e-6);
            CHECK(oracle::max_relative_error(ga, na, 1e-6) < 1e-5);
            const VecX nb = oracle::finite_difference_gradient(
                [&](const VecX& x) { return js_div_midpoint(a, x, kEps); }, b, 1e-6);
            CHECK(oracle::max_relative_error(gb, nb, 1e-6) < 1e-5);
        }
    }
}

TEST_CASE("robust_loss") {
    LossConfig config;
    SUBCASE("identical predictions give exactly zero") {
        VecX p(3);
        p << 0.2, 0.5, 0.3;
        CHECK(robust_loss({p, p, p, p, p}, config) == 0.0);
    }
    SUBCASE("K=2 reduces to the pair divergence") {
        Rng rng(19);
        const VecX a = simplex_point(rng, 3), b = simplex_point(rng, 3);
        CHECK(robust_loss({a, b}, config) == js_div(a, b, config.epsilon));
    }
    SUBCASE("K=3 with (p,p,q): pair sum enumerates to 2 js(p,q)") {
        Rng rng(23);
        const VecX p = simplex_point(rng, 3), q = simplex_point(rng, 3);
        const double pair_averaged = robust_loss({p, p, q}, config);
        const double expected_sum = 2.0 * js_div(p, q, config.epsilon);
        CHECK(pair_averaged * 3.0 == doctest::Approx(expected_sum).epsilon(1e-12));
    }
    SUBCASE("fewer than two predictions rejected") {
        VecX p(3);
        p << 0.2, 0.5, 0.3;
        CHECK_THROWS_AS(robust_loss({p}, config), DataError);
        CHECK_THROWS_AS(robust_loss({}, config), DataError);
    }
    SUBCASE("gradients match central differences over K=4") {
        Rng rng(29);
        std::vector<VecX> preds;
        for (int k = 0; k < 4; ++k) preds.push_back(simplex_point(rng, 3));
        std::vector<VecX> grads;
        robust_loss(preds, config, &grads);
        for (int k = 0; k < 4; ++k) {
            auto probe = preds;
            const VecX numeric = oracle::finite_difference_gradient(
                [&](const VecX& x) {
                    probe[static_cast<std::size_t>(k)] = x;
                    return robust_loss(probe, config);
                },
                preds[static_cast<std::size_t>(k)], 1e-6);
            CHECK(oracle::max_relative_error(grads[static_cast<std::size_t>(k)], numeric, 1e-6) <
                  1e-5);
        }
    }
}

TEST_CASE("total_loss") {
    Rng rng(37);
    auto make_groups = [&](int n_groups, int k, int l) {
        std::vector<LossGroup> groups;
        for (int g = 0; g < n_groups; ++g) {
            LossGroup lg;
            lg.label = VecX::Zero(l);
            lg.label[static_cast<int>(rng.below(static_cast<std::uint64_t>(l)))] = 1.0;
            for (int i = 0; i < k; ++i) {
                lg.preds.push_back(simplex_point(rng, l));
                lg.is_original.push_back(i == 0);
            }
            groups.push_back(std::move(lg));
        }
        return groups;
    };

    SUBCASE("alpha 0 collapses total to acc exactly") {
        LossConfig config;
        config.alpha = 0.0;
        const auto groups = make_groups(4, 5, 3);
        const auto out = total_loss(groups, config);
        CHECK(out.total == out.acc);
        CHECK(out.rbt > 0.0);  // still computed
    }
    SUBCASE("identical predictions within groups zero the robust term") {
        LossConfig config;
        std::vector<LossGroup> groups;
        LossGroup lg;
        lg.label = (VecX(3) << 0, 1, 0).finished();
        const VecX p = simplex_point(rng, 3);
        for (int i = 0; i < 5; ++i) {
            lg.preds.push_back(p);
            lg.is_original.push_back(i == 0);
        }
        groups.push_back(lg);
        const auto out = total_loss(groups, config);
        CHECK(out.rbt == 0.0);
        CHECK(out.total == out.acc);
    }
    SUBCASE("random batch matches an independent recomputation at alpha 10") {
        LossConfig config;
        config.alpha = 10.0;
        const auto groups = make_groups(6, 5, 3);
        const auto out = total_loss(groups, config);

        // independent: recompute the two terms from scratch
        double acc = 0.0;
        int pairs = 0;
        double rbt = 0.0;
        for (const auto& g : groups) {
            for (const auto& p : g.preds) {
                acc += accuracy_loss(g.label, p, config.epsilon);
                ++pairs;
            }
            double pair_sum = 0.0;
            int pair_count = 0;
            for (std::size_t m = 0; m < g.preds.size(); ++m) {
                for (std::size_t n = m + 1; n < g.preds.size(); ++n) {
                    pair_sum += js_div(g.preds[m], g.preds[n], config.epsilon);
                    ++pair_count;
                }
            }
            rbt += pair_sum / pair_count;
        }
        acc /= pairs;
        rbt /= static_cast<double>(groups.size());
        CHECK(out.acc == doctest::Approx(acc).epsilon(1e-12));
        CHECK(out.rbt == doctest::Approx(rbt).epsilon(1e-12));
        CHECK(out.total == doctest::Approx(acc + 10.0 * rbt).epsilon(1e-12));
    }
    SUBCASE("total is affine in alpha with slope rbt") {
        const auto groups = make_groups(3, 5, 5);
        LossConfig config;
        config.alpha = 0.0;
        const auto at0 = total_loss(groups, config);
        for (double alpha : {1.0, 5.0, 12.5, 30.0}) {
            config.alpha = alpha;
            const auto at = total_loss(groups, config);
            CHECK(at.acc == at0.acc);
            CHECK(at.rbt == at0.rbt);
            CHECK(at.total == doctest::Approx(at0.acc + alpha * at0.rbt).epsilon(1e-12));
            CHECK(at.total >= at0.total);  // non-decreasing, rbt >= 0
        }
    }
    SUBCASE("group with mismatched prediction count rejected") {
        auto groups = make_groups(2, 5, 3);
        groups[1].preds.pop_back();
        groups[1].is_original.pop_back();
        LossConfig config;
        CHECK_THROWS_AS(total_loss(groups, config), DataError);
    }
    SUBCASE("excluding the original removes it from the robust pairs") {
        LossConfig with_original;
        LossConfig without = with_original;
        without.include_original_in_robust = false;

        std::vector<LossGroup> groups;
        LossGroup lg;
        lg.label = (VecX(3) << 1, 0, 0).finished();
        const VecX outlier = (VecX(3) << 0.98, 0.01, 0.01).finished();
        const VecX common = (VecX(3) << 0.2, 0.4, 0.4).finished();
        lg.preds = {outlier, common, common, common, common};
        lg.is_original = {true, false, false, false, false};
        groups.push_back(lg);

        CHECK(total_loss(groups, with_original).rbt > 0.0);
        CHECK(total_loss(groups, without).rbt == 0.0);
    }
    SUBCASE("epsilon must stay below 1/L") {
        LossConfig config;
        config.epsilon = 0.4;
        const auto groups = make_groups(1, 5, 3);
        CHECK_THROWS_AS(total_loss(groups, config), DataError);
    }
    SUBCASE("gradients match central differences through the whole objective") {
        LossConfig config;
        config.alpha = 4.0;
        const auto groups = make_groups(2, 5, 3);
        std::vector<std::vector<VecX>> grads;
        total_loss(groups, config, &grads);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (std::size_t k = 0; k < groups[g].preds.size(); ++k) {
                auto probe = groups;
                const VecX numeric = oracle::finite_difference_gradient(
                    [&](const VecX& x) {
                        probe[g].preds[k] = x;
                        return total_loss(probe, config).total;
                    },
                    groups[g].preds[k], 1e-6);
                CHECK(oracle::max_relative_error(grads[g][k], numeric, 1e-6) < 1e-4);
            }
        }
    }
}
