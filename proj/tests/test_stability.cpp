#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "brm/dataset.hpp"
#include "brm/errors.hpp"
#include "brm/mdp.hpp"
#include "brm/stability.hpp"

namespace {

struct Fixture {
    brm::TabularMdp mdp = brm::make_random_mdp(3, 2, 0.9, 71);
    Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    brm::TransitionDataset data =
        brm::generate_dataset(mdp, policy, 40, brm::SampleMode::iid_pairs, 72, 2);
};

bool same_sample(const brm::Sample& a, const brm::Sample& b) {
    return a.s == b.s && a.a == b.a && a.r == b.r && a.s_next == b.s_next;
}

} // namespace

TEST_CASE("make_neighbor changes exactly one position and keeps the visited set") {
    Fixture fx;
    for (int i : {0, 7, 39}) {
        const brm::NeighborPair pair = brm::make_neighbor(fx.mdp, fx.policy, fx.data, i, 500 + i);
        CHECK(pair.index == i);
        CHECK(pair.draws_used >= 1);
        CHECK(pair.neighbor.n() == fx.data.n());
        for (int j = 0; j < fx.data.n(); ++j) {
            if (j == i) {
                CHECK(same_sample(pair.neighbor.samples[j], pair.replacement));
            } else {
                CHECK(same_sample(pair.neighbor.samples[j], fx.data.samples[j]));
            }
        }
        const std::vector<int> base_counts = brm::visit_counts(fx.data);
        const std::vector<int> neigh_counts = brm::visit_counts(pair.neighbor);
        REQUIRE(base_counts.size() == neigh_counts.size());
        for (std::size_t k = 0; k < base_counts.size(); ++k)
            CHECK((base_counts[k] > 0) == (neigh_counts[k] > 0));
    }
    CHECK_THROWS_AS(brm::make_neighbor(fx.mdp, fx.policy, fx.data, -1, 1), brm::DomainError);
    CHECK_THROWS_AS(brm::make_neighbor(fx.mdp, fx.policy, fx.data, fx.data.n(), 1),
                    brm::DomainError);
    CHECK_THROWS_AS(brm::make_neighbor(fx.mdp, fx.policy, fx.data, 0, 1, 0), brm::CoverageError);
}

TEST_CASE("make_neighbor keeps a lone pair on its own (s,a)") {
    Fixture fx;
    brm::TransitionDataset tiny;
    tiny.n_states = fx.mdp.n_states;
    tiny.n_actions = fx.mdp.n_actions;
    tiny.samples = {{0, 0, fx.mdp.reward[0][0], 1},
                    {0, 0, fx.mdp.reward[0][0], 2},
                    {0, 0, fx.mdp.reward[0][0], 0},
                    {1, 1, fx.mdp.reward[1][1], 2}};
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
        const brm::NeighborPair pair = brm::make_neighbor(fx.mdp, fx.policy, tiny, 3, seed);
        CHECK(pair.replacement.s == 1);
        CHECK(pair.replacement.a == 1);
    }
    // A non-lone index may move anywhere already visited.
    const brm::NeighborPair pair = brm::make_neighbor(fx.mdp, fx.policy, tiny, 0, 21);
    const int flat = pair.replacement.s * tiny.n_actions + pair.replacement.a;
    CHECK((flat == 0 || flat == 1 * tiny.n_actions + 1));
}

TEST_CASE("replacement law matches the generation law on a fully visited dataset") {
    Fixture fx;
    const Eigen::MatrixXd weight = brm::occupancy_weight(fx.mdp, fx.policy);
    const int cells = fx.mdp.n_states * fx.mdp.n_actions;
    std::vector<int> freq(static_cast<std::size_t>(cells), 0);
    const int draws = 6000;
    for (int k = 0; k < draws; ++k) {
        const brm::NeighborPair pair =
            brm::make_neighbor(fx.mdp, fx.policy, fx.data, 5, 900000ULL + k);
        ++freq[static_cast<std::size_t>(pair.replacement.s * fx.mdp.n_actions +
                                        pair.replacement.a)];
    }
    // All pairs are visited here, so rejection never filters and the law is
    // the plain discounted-occupancy sample law.
    for (int s = 0; s < fx.mdp.n_states; ++s)
        for (int a = 0; a < fx.mdp.n_actions; ++a) {
            const double p = weight(s, a);
            const double se = std::sqrt(p * (1.0 - p) / draws);
            const double hat =
                freq[static_cast<std::size_t>(s * fx.mdp.n_actions + a)] / double(draws);
            CHECK(std::abs(hat - p) <= 5.0 * se + 1e-12);
        }
}

TEST_CASE("coupled runs are bitwise equal when the replaced index is never drawn") {
    Fixture fx;
    const brm::Parameterization tab = brm::Parameterization::tabular(fx.mdp, fx.data);
    brm::SgdaRunConfig cfg;
    cfg.T = 12;
    cfg.B = 1;
    cfg.c1 = 0.5;
    cfg.c2 = 10.0;
    cfg.seed = 77;
    cfg.index_stream = 3;
    cfg.record_every = 0;
    const brm::ParamPoint init = brm::default_init(tab, fx.data);

    const brm::RunTrace base_run = brm::run_sgda(tab, fx.mdp.beta, fx.data, cfg, init);
    int unseen = -1;
    for (int i = 0; i < fx.data.n() && unseen < 0; ++i)
        if (std::find(base_run.index_log.begin(), base_run.index_log.end(), i) ==
            base_run.index_log.end())
            unseen = i;
    REQUIRE(unseen >= 0);  // 12 draws cannot cover 40 indices

    const brm::NeighborPair pair = brm::make_neighbor(fx.mdp, fx.policy, fx.data, unseen, 31);
    const brm::CoupledResult res = brm::coupled_stability(tab, fx.mdp.beta, fx.data, pair, cfg, init);
    CHECK(res.hits == 0);
    CHECK(res.dist_w == 0.0);
    CHECK(res.dist_v == 0.0);
    CHECK(res.total() == 0.0);
}

TEST_CASE("coupled run with neighbor equal to base gives exactly zero") {
    Fixture fx;
    const brm::Parameterization tab = brm::Parameterization::tabular(fx.mdp, fx.data);
    brm::SgdaRunConfig cfg;
    cfg.T = 60;
    cfg.B = 2;
    cfg.c1 = 0.5;
    cfg.c2 = 10.0;
    cfg.seed = 78;
    cfg.record_every = 0;
    brm::NeighborPair pair;
    pair.index = 4;
    pair.replacement = fx.data.samples[4];
    pair.neighbor = fx.data;
    const brm::ParamPoint init = brm::default_init(tab, fx.data);
    const brm::CoupledResult res = brm::coupled_stability(tab, fx.mdp.beta, fx.data, pair, cfg, init);
    CHECK(res.hits > 0);  // 120 draws over 40 indices hit index 4 w.h.p. at this seed
    CHECK(res.dist_w == 0.0);
    CHECK(res.dist_v == 0.0);
}

TEST_CASE("coupled distances equal an independent replay of the logged indices") {
    Fixture fx;
    const brm::Parameterization tab = brm::Parameterization::tabular(fx.mdp, fx.data);
    brm::SgdaRunConfig cfg;
    cfg.T = 80;
    cfg.B = 3;
    cfg.c1 = 0.4;
    cfg.c2 = 8.0;
    cfg.seed = 79;
    cfg.index_stream = 5;
    cfg.record_every = 0;
    const brm::ParamPoint init = brm::default_init(tab, fx.data);

    const brm::RunTrace base_run = brm::run_sgda(tab, fx.mdp.beta, fx.data, cfg, init);
    const int i = base_run.index_log.front();  // guaranteed at least one hit
    const brm::NeighborPair pair = brm::make_neighbor(fx.mdp, fx.policy, fx.data, i, 41);
    const brm::RunTrace neigh_run =
        brm::run_sgda(tab, fx.mdp.beta, pair.neighbor, cfg, init, &base_run.index_log);

    const brm::CoupledResult res = brm::coupled_stability(tab, fx.mdp.beta, fx.data, pair, cfg, init);
    CHECK(res.hits >= 1);
    CHECK(res.dist_w == (base_run.final.w - neigh_run.final.w).norm());
    CHECK(res.dist_v == (base_run.final.v - neigh_run.final.v).norm());
}

TEST_CASE("estimate_eps_T is zero at T = 0 and audits zero-hit pairs") {
    Fixture fx;
    brm::DataLawSpec law;
    law.n = 30;
    law.min_visits = 2;
    law.seed = 101;

    brm::SgdaRunConfig cfg;
    cfg.T = 0;
    cfg.B = 1;
    cfg.c1 = 0.5;
    cfg.c2 = 10.0;
    const brm::StabilityReport zero =
        brm::estimate_eps_T(fx.mdp, fx.policy, brm::ParamKind::tabular, law, cfg, 2, 4);
    CHECK(zero.eps_mean == 0.0);
    CHECK(zero.eps_stderr == 0.0);
    CHECK(zero.zero_hit_nonzero == 0);

    // T = 5 single draws can hit at most 5 of 30 indices, so most coupled
    // pairs are zero-hit and must come back exactly zero.
    cfg.T = 5;
    const brm::StabilityReport sparse =
        brm::estimate_eps_T(fx.mdp, fx.policy, brm::ParamKind::tabular, law, cfg, 1, 0);
    CHECK(sparse.i_count == law.n);
    CHECK(sparse.zero_hit_pairs >= law.n - cfg.T);
    CHECK(sparse.zero_hit_nonzero == 0);
}

TEST_CASE("estimate_eps_T smoke: positive, reproducible, bookkeeping consistent") {
    Fixture fx;
    brm::DataLawSpec law;
    law.n = 30;
    law.min_visits = 2;
    law.seed = 103;

    brm::SgdaRunConfig cfg;
    cfg.T = 300;
    cfg.B = 1;
    cfg.c1 = 0.5;
    cfg.c2 = 20.0;

    const brm::StabilityReport rep =
        brm::estimate_eps_T(fx.mdp, fx.policy, brm::ParamKind::tabular, law, cfg, 3, 5);
    CHECK(rep.n == 30);
    CHECK(rep.T == 300);
    CHECK(rep.B == 1);
    CHECK(rep.replicates == 3);
    CHECK(rep.i_count == 5);
    CHECK(rep.replicate_means.size() == 3);
    CHECK(rep.eps_mean > 0.0);
    CHECK(rep.eps_stderr >= 0.0);
    CHECK(rep.zero_hit_nonzero == 0);
    CHECK(rep.mean_dist_w >= 0.0);
    CHECK(rep.mean_dist_v >= 0.0);
    CHECK(rep.mean_hits > 0.0);
    double mean = 0.0;
    for (double m : rep.replicate_means) mean += m;
    mean /= static_cast<double>(rep.replicate_means.size());
    CHECK(rep.eps_mean == doctest::Approx(mean).epsilon(1e-12));

    const brm::StabilityReport again =
        brm::estimate_eps_T(fx.mdp, fx.policy, brm::ParamKind::tabular, law, cfg, 3, 5);
    CHECK(again.eps_mean == rep.eps_mean);
    CHECK(again.eps_stderr == rep.eps_stderr);

    CHECK_THROWS_AS(brm::estimate_eps_T(fx.mdp, fx.policy, brm::ParamKind::tabular, law, cfg, 0, 5),
                    brm::DomainError);
}

TEST_CASE("single-sample dataset on a one-state MDP is perfectly stable") {
    brm::TabularMdp one;
    one.n_states = 1;
    one.n_actions = 1;
    one.beta = 0.9;
    one.reward = {{0.7}};
    one.transition = {{{1.0}}};
    one.init_dist = {1.0};
    one.validate();
    const Eigen::MatrixXd policy = brm::uniform_policy(one);

    brm::DataLawSpec law;
    law.n = 1;
    law.min_visits = 1;
    law.seed = 202;

    brm::SgdaRunConfig cfg;
    cfg.T = 50;
    cfg.B = 1;
    cfg.c1 = 0.2;
    cfg.c2 = 5.0;

    // The replacement can only be the identical sample, so every coupled run
    // coincides bitwise even though the replaced index is hit constantly.
    const brm::StabilityReport rep =
        brm::estimate_eps_T(one, policy, brm::ParamKind::tabular, law, cfg, 2, 0);
    CHECK(rep.eps_mean == 0.0);
    CHECK(rep.mean_hits == doctest::Approx(50.0));
}
