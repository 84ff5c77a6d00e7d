#include "doctest.h"

#include <cmath>
#include <string>

#include "brm/dataset.hpp"
#include "brm/errors.hpp"
#include "brm/mdp.hpp"
#include "oracles.hpp"

namespace {

bool same_samples(const brm::TransitionDataset& a, const brm::TransitionDataset& b) {
    if (a.n() != b.n()) return false;
    for (int i = 0; i < a.n(); ++i) {
        const brm::Sample &x = a.samples[static_cast<std::size_t>(i)],
                          &y = b.samples[static_cast<std::size_t>(i)];
        if (x.s != y.s || x.a != y.a || x.r != y.r || x.s_next != y.s_next) return false;
    }
    return true;
}

} // namespace

TEST_CASE("generation is bit-identical for equal arguments") {
    const brm::TabularMdp mdp = brm::make_random_mdp(4, 2, 0.9, 3);
    const Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    const auto a = brm::generate_dataset(mdp, policy, 200, brm::SampleMode::iid_pairs, 9, 1);
    const auto b = brm::generate_dataset(mdp, policy, 200, brm::SampleMode::iid_pairs, 9, 1);
    const auto c = brm::generate_dataset(mdp, policy, 200, brm::SampleMode::iid_pairs, 10, 1);
    CHECK(same_samples(a, b));
    CHECK(!same_samples(a, c));
    CHECK(a.seed == 9);
    CHECK(a.mode == brm::SampleMode::iid_pairs);

    const auto t1 =
        brm::generate_dataset(mdp, policy, 200, brm::SampleMode::single_trajectory, 9, 1);
    const auto t2 =
        brm::generate_dataset(mdp, policy, 200, brm::SampleMode::single_trajectory, 9, 1);
    CHECK(same_samples(t1, t2));
}

TEST_CASE("iid pairs follow the discounted occupancy marginal") {
    const brm::TabularMdp mdp = brm::make_random_mdp(3, 2, 0.9, 17);
    const Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    const int n = 200000;
    const auto data = brm::generate_dataset(mdp, policy, n, brm::SampleMode::iid_pairs, 41, 1);
    REQUIRE(data.n() == n);

    // Marginal (s,a) frequencies vs the power-series occupancy, 4.5 SE per
    // pair (6 pairs tested; the joint false-alarm rate stays tiny).
    const Eigen::VectorXd d = oracle::occupancy_series(mdp, policy);
    const std::vector<int> counts = brm::visit_counts(data);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
            const double p = d(s) * policy(s, a);
            const double freq =
                static_cast<double>(counts[static_cast<std::size_t>(s * 2 + a)]) / n;
            const double se = std::sqrt(p * (1.0 - p) / n);
            CHECK(std::abs(freq - p) <= 4.5 * se);
        }

    // Conditional next-state frequencies vs the transition kernel.
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
            std::vector<int> next_counts(3, 0);
            int total = 0;
            for (const brm::Sample& z : data.samples)
                if (z.s == s && z.a == a) {
                    ++next_counts[static_cast<std::size_t>(z.s_next)];
                    ++total;
                }
            for (int sn = 0; sn < 3; ++sn) {
                const double p = mdp.transition[s][a][sn];
                const double freq = static_cast<double>(next_counts[static_cast<std::size_t>(sn)]) /
                                    total;
                const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / total);
                CHECK(std::abs(freq - p) <= 4.5 * se);
            }
        }

    // Rewards are logged exactly.
    for (const brm::Sample& z : data.samples) CHECK(z.r == mdp.reward[z.s][z.a]);
}

TEST_CASE("single trajectory chains through the kernel") {
    const brm::TabularMdp mdp = brm::make_random_mdp(4, 2, 0.9, 23);
    const Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    const auto data =
        brm::generate_dataset(mdp, policy, 500, brm::SampleMode::single_trajectory, 7, 1);
    REQUIRE(data.n() == 500);
    for (int i = 0; i + 1 < data.n(); ++i)
        CHECK(data.samples[static_cast<std::size_t>(i)].s_next ==
              data.samples[static_cast<std::size_t>(i) + 1].s);
    for (const brm::Sample& z : data.samples) CHECK(z.r == mdp.reward[z.s][z.a]);
}

TEST_CASE("coverage floor is enforced or fails loudly") {
    const brm::TabularMdp mdp = brm::make_random_mdp(3, 2, 0.9, 29);
    const Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    const auto data = brm::generate_dataset(mdp, policy, 300, brm::SampleMode::iid_pairs, 5, 3);
    for (int c : brm::visit_counts(data)) CHECK(c >= 3);
    CHECK(data.min_visits == 3);

    // n = 2 cannot cover 6 pairs at min_visits 5; the error names what is
    // missing.
    try {
        brm::generate_dataset(mdp, policy, 2, brm::SampleMode::iid_pairs, 5, 5, 3);
        FAIL("expected CoverageError");
    } catch (const brm::CoverageError& e) {
        CHECK(std::string(e.what()).find('(') != std::string::npos);
    }
}

TEST_CASE("visit counts total n and the policy hash is stable") {
    const brm::TabularMdp mdp = brm::make_random_mdp(3, 2, 0.8, 31);
    const Eigen::MatrixXd uniform = brm::uniform_policy(mdp);
    const auto data = brm::generate_dataset(mdp, uniform, 120, brm::SampleMode::iid_pairs, 6, 1);
    int total = 0;
    for (int c : brm::visit_counts(data)) total += c;
    CHECK(total == 120);

    CHECK(data.policy_hash == brm::policy_hash(uniform));
    Eigen::MatrixXd tilted = uniform;
    tilted(0, 0) += 0.25;
    tilted(0, 1) -= 0.25;
    CHECK(brm::policy_hash(tilted) != brm::policy_hash(uniform));
}

TEST_CASE("mode names round-trip") {
    CHECK(brm::sample_mode_from_string("iid_pairs") == brm::SampleMode::iid_pairs);
    CHECK(brm::sample_mode_from_string("single_trajectory") ==
          brm::SampleMode::single_trajectory);
    CHECK(std::string(brm::to_string(brm::SampleMode::iid_pairs)) == "iid_pairs");
    CHECK(std::string(brm::to_string(brm::SampleMode::single_trajectory)) ==
          "single_trajectory");
    CHECK_THROWS_AS(brm::sample_mode_from_string("bogus"), brm::DomainError);
}
