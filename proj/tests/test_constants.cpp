#include "doctest.h"

#include <cmath>
#include <limits>

#include "brm/constants.hpp"
#include "brm/dataset.hpp"
#include "brm/errors.hpp"
#include "brm/mdp.hpp"
#include "oracles.hpp"

namespace {

/// Every (s,a) pair exactly m times; next states are arbitrary.
brm::TransitionDataset equal_count_dataset(const brm::TabularMdp& mdp, int m) {
    brm::TransitionDataset data;
    data.n_states = mdp.n_states;
    data.n_actions = mdp.n_actions;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            for (int k = 0; k < m; ++k)
                data.samples.push_back({s, a, mdp.reward[s][a], (s + a + k) % mdp.n_states});
    return data;
}

} // namespace

TEST_CASE("beta = 0 equal counts: Phi is a diagonal quadratic with exact PL = QG") {
    brm::TabularMdp mdp = brm::make_random_mdp(3, 2, 0.0, 81);
    const brm::TransitionDataset data = equal_count_dataset(mdp, 3);
    const brm::Parameterization tab = brm::Parameterization::tabular(mdp, data);
    const brm::SaddleSolution sol = brm::solve_saddle(tab, mdp.beta, data, 1e-12);

    const brm::ConstantsEstimate k =
        brm::estimate_constants(tab, mdp.beta, data, sol, 1.0, 64, 7001);

    // Phi(w) = sum_pairs W (r - w)^2 with W = 1/6 each, so every curvature
    // statistic collapses to the same number.
    const double curv = 2.0 / 6.0;
    CHECK(k.mu_pl_hat == doctest::Approx(curv).epsilon(1e-12));
    CHECK(k.mu_qg_hat == doctest::Approx(curv).epsilon(1e-12));
    CHECK(k.L_hat == doctest::Approx(curv).epsilon(1e-9));
    CHECK(k.G_hat == doctest::Approx(2.0).epsilon(1e-9));  // 2|delta| at radius 1

    // The dual term carries a beta^2 factor, so at beta = 0 concavity is nil.
    CHECK(k.rho_hat == 0.0);
    CHECK(k.c_hat == 0.0);
    CHECK(std::isinf(k.alpha));
}

TEST_CASE("rho_hat for uniform counts is 2 beta^2 count/n, and derived fields are consistent") {
    brm::TabularMdp mdp = brm::make_random_mdp(3, 2, 0.0, 81);
    mdp.beta = 0.9;
    const brm::TransitionDataset data = equal_count_dataset(mdp, 3);
    const brm::Parameterization tab = brm::Parameterization::tabular(mdp, data);
    const brm::SaddleSolution sol = brm::solve_saddle(tab, mdp.beta, data, 1e-11);

    const brm::ConstantsEstimate k =
        brm::estimate_constants(tab, mdp.beta, data, sol, 1.0, 64, 7002);
    CHECK(k.rho_hat == doctest::Approx(2.0 * 0.81 / 6.0).epsilon(1e-14));
    CHECK(k.alpha == doctest::Approx(4.0 * k.L_hat * k.L_hat / (k.rho_hat * k.rho_hat))
                         .epsilon(1e-14));
    CHECK(k.c_hat == doctest::Approx(std::min(k.mu_pl_hat / 2.0, k.rho_hat / 2.0))
                         .epsilon(1e-14));
    CHECK(k.ball_radius == 1.0);
    CHECK(k.probe_budget == 64);
    CHECK(!k.method_notes.empty());
}

TEST_CASE("generated instance: estimates positive, L dominated and probe-stable") {
    const brm::TabularMdp mdp = brm::make_random_mdp(4, 2, 0.9, 21);
    const brm::TransitionDataset data =
        brm::generate_dataset(mdp, brm::uniform_policy(mdp), 60, brm::SampleMode::iid_pairs, 33, 1);
    const brm::Parameterization tab = brm::Parameterization::tabular(mdp, data);
    const brm::SaddleSolution sol = brm::solve_saddle(tab, mdp.beta, data, 1e-11);
    const double radius = 2.0;

    const brm::ConstantsEstimate k =
        brm::estimate_constants(tab, mdp.beta, data, sol, radius, 200, 7003);
    CHECK(k.L_hat > 0.0);
    CHECK(k.G_hat > 0.0);
    CHECK(k.rho_hat > 0.0);
    CHECK(k.mu_pl_hat > 0.0);
    CHECK(k.mu_qg_hat > 0.0);
    CHECK(k.alpha >= 4.0 * k.L_hat * k.L_hat / (k.rho_hat * k.rho_hat) - 1e-12);
    CHECK(std::isfinite(k.c_hat));

    // Probes stay in the ball around the saddle, so the analytic box bound on
    // the joint Hessian dominates every measured difference quotient.
    const double w_box = sol.x_star.cwiseAbs().maxCoeff() + radius + 0.01;
    const double v_box = sol.v_star.cwiseAbs().maxCoeff() + radius + 0.01;
    CHECK(k.L_hat <= oracle::smoothness_box_bound(mdp, w_box, v_box));

    // Spot check rho against the visit counts directly.
    const std::vector<int> counts = brm::visit_counts(data);
    int min_count = data.n();
    for (int c : counts)
        if (c > 0) min_count = std::min(min_count, c);
    CHECK(k.rho_hat ==
          doctest::Approx(2.0 * mdp.beta * mdp.beta * min_count / data.n()).epsilon(1e-14));

    // Estimates are probe-set maxima/minima; a 10x denser probe set should
    // move L by less than 10 percent.
    const brm::ConstantsEstimate lo =
        brm::estimate_constants(tab, mdp.beta, data, sol, radius, 100, 7004);
    const brm::ConstantsEstimate hi =
        brm::estimate_constants(tab, mdp.beta, data, sol, radius, 1000, 7004);
    CHECK(std::abs(hi.L_hat - lo.L_hat) <= 0.10 * std::max(hi.L_hat, lo.L_hat));
    CHECK(hi.G_hat >= lo.G_hat - 1e-12);  // larger probe set can only see more

    // Same arguments, same estimate, bit for bit.
    const brm::ConstantsEstimate again =
        brm::estimate_constants(tab, mdp.beta, data, sol, radius, 200, 7003);
    CHECK(again.L_hat == k.L_hat);
    CHECK(again.G_hat == k.G_hat);
    CHECK(again.mu_pl_hat == k.mu_pl_hat);
    CHECK(again.mu_qg_hat == k.mu_qg_hat);
}

TEST_CASE("estimate_constants rejects bad inputs and degenerate probe sets") {
    const brm::TabularMdp mdp = brm::make_random_mdp(3, 2, 0.9, 82);
    const brm::TransitionDataset data =
        brm::generate_dataset(mdp, brm::uniform_policy(mdp), 40, brm::SampleMode::iid_pairs, 83, 1);
    const brm::Parameterization tab = brm::Parameterization::tabular(mdp, data);
    const brm::SaddleSolution sol = brm::solve_saddle(tab, mdp.beta, data, 1e-11);

    CHECK_THROWS_AS(brm::estimate_constants(tab, mdp.beta, data, sol, 0.0, 64, 1),
                    brm::DomainError);
    CHECK_THROWS_AS(brm::estimate_constants(tab, mdp.beta, data, sol, 1.0, 7, 1),
                    brm::DomainError);
    // Probes this close to the saddle are all skipped by the distance and
    // gap floors, leaving nothing to form PL/QG ratios from.
    CHECK_THROWS_AS(brm::estimate_constants(tab, mdp.beta, data, sol, 1e-12, 64, 1),
                    brm::ConvergenceError);
}
