#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "param_vector.hpp"
#include "rrank/core/io.hpp"
#include "rrank/errors.hpp"
#include "rrank/harness/evaluate.hpp"
#include "rrank/harness/synthetic.hpp"
#include "rrank/harness/train.hpp"
#include "rrank/ranker/forward.hpp"
#include "rrank/rng.hpp"

using namespace rrank;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.num_queries = 30;
    spec.docs_per_query = 8;
    spec.dim = 12;
    spec.noise_scale = 0.3;
    spec.seed = 5;
    return spec;
}

Dataset small_dataset(const SyntheticSpec& spec) {
    auto data = generate_synthetic(spec);
    return build_dataset(std::move(data.embeddings), std::move(data.qrels),
                         {kAllRoles.begin(), kAllRoles.end()});
}

TrainConfig small_config() {
    TrainConfig config;
    config.bottleneck = 6;
    config.epochs = 8;
    config.batch_size = 16;
    config.seed = 3;
    return config;
}

}  // namespace

TEST_CASE("generate_synthetic") {
    SUBCASE("deterministic per seed") {
        const auto a = generate_synthetic(small_spec());
        const auto b = generate_synthetic(small_spec());
        CHECK(serialize_embeddings(a.embeddings) == serialize_embeddings(b.embeddings));
        CHECK(serialize_qrels(a.qrels) == serialize_qrels(b.qrels));
        CHECK(serialize_queries(a.queries) == serialize_queries(b.queries));

        auto other = small_spec();
        other.seed = 6;
        const auto c = generate_synthetic(other);
        CHECK(serialize_embeddings(a.embeddings) != serialize_embeddings(c.embeddings));
    }
    SUBCASE("noise 0 collapses the role variants of each pair") {
        auto spec = small_spec();
        spec.noise_scale = 0.0;
        const auto data = generate_synthetic(spec);
        for (const auto& q : data.queries.items()) {
            const auto* base = data.embeddings.find(q.qid, "d1_1", Role::Original);
            if (!base) continue;
            for (Role r : kAllRoles) {
                const auto* e = data.embeddings.find(q.qid, base->docid, r);
                REQUIRE(e != nullptr);
                CHECK(e->vec == base->vec);
            }
        }
    }
    SUBCASE("counting: queries x docs x roles embeddings") {
        SyntheticSpec spec;
        spec.num_queries = 200;
        spec.docs_per_query = 20;
        const auto data = generate_synthetic(spec);
        CHECK(data.embeddings.size() == 200 * 20 * 5);
        CHECK(data.qrels.size() == 200 * 20);
        CHECK(data.queries.size() == 200);
        CHECK(data.rewrites.size() == 200 * 4);
    }
    SUBCASE("grades shared across role variants by construction") {
        const auto data = generate_synthetic(small_spec());
        CHECK(data.qrels.num_levels() == 3);
        for (const auto& [qid, docs] : data.qrels.all()) {
            for (const auto& [docid, grade] : docs) {
                CHECK(grade >= 0);
                CHECK(grade < 3);
            }
        }
    }
}

TEST_CASE("build_dataset error paths") {
    auto synth = generate_synthetic(small_spec());
    SUBCASE("missing role embeddings are listed") {
        EmbeddingSet partial;
        for (const auto& e : synth.embeddings.items()) {
            if (e.role == Role::Elder && e.qid == "q1") continue;
            PairEmbedding copy = e;
            partial.add(std::move(copy));
        }
        CHECK_THROWS_WITH_AS(
            build_dataset(std::move(partial), synth.qrels, {kAllRoles.begin(), kAllRoles.end()}),
            doctest::Contains("elder"), DataError);
    }
    SUBCASE("qid without qrels rejected") {
        Qrels other(3);
        other.set("not_there", "d", 0);
        auto embeddings = generate_synthetic(small_spec()).embeddings;
        CHECK_THROWS_AS(
            build_dataset(std::move(embeddings), other, {kAllRoles.begin(), kAllRoles.end()}),
            DataError);
    }
}

TEST_CASE("train") {
    const auto data = small_dataset(small_spec());

    SUBCASE("lr 0 leaves parameters at initialization and the curve flat") {
        auto config = small_config();
        config.learning_rate = 0.0;
        config.epochs = 3;
        const auto result = train(data, config);
        const auto init = init_params(data.dim(), config.bottleneck, data.num_levels(),
                                      config.seed);
        CHECK(testutil::flatten(result.params, result.params.dims) ==
              testutil::flatten(init, init.dims));
        REQUIRE(result.loss_curve.size() == 3);
        CHECK(result.loss_curve[0].total == doctest::Approx(result.loss_curve[2].total).epsilon(1e-12));
    }
    SUBCASE("alpha 0 training equals wo-l training, checkpoint bytes and all") {
        auto full0 = small_config();
        full0.alpha = 0.0;
        full0.ablation_mode = AblationMode::Full;
        auto wol = small_config();
        wol.alpha = 10.0;  // forced to effective 0 by the mode
        wol.ablation_mode = AblationMode::NoRobustLoss;
        const auto a = train(data, full0);
        const auto b = train(data, wol);
        CHECK(serialize_params(a.params, "x") == serialize_params(b.params, "x"));
        // recorded rbt values are computed even though they do not drive updates
        CHECK(a.loss_curve[0].rbt > 0.0);
        for (std::size_t e = 0; e < a.loss_curve.size(); ++e) {
            CHECK(a.loss_curve[e].acc == b.loss_curve[e].acc);
            CHECK(a.loss_curve[e].total == a.loss_curve[e].acc);
        }
    }
    SUBCASE("seeded full run decreases the loss") {
        auto config = small_config();
        config.epochs = 12;
        const auto result = train(data, config);
        CHECK(result.loss_curve.back().total < result.loss_curve.front().total);
    }
    SUBCASE("deterministic: same data and config give identical checkpoints") {
        const auto a = train(data, small_config());
        const auto b = train(data, small_config());
        CHECK(serialize_params(a.params, "full") == serialize_params(b.params, "full"));
        CHECK(serialize_loss_curve(a.loss_curve) == serialize_loss_curve(b.loss_curve));
    }
    SUBCASE("momentum accelerates early descent on this dataset") {
        auto plain = small_config();
        auto with_momentum = small_config();
        with_momentum.momentum = 0.9;
        const auto a = train(data, plain);
        const auto b = train(data, with_momentum);
        CHECK(b.loss_curve.back().total < a.loss_curve.front().total);
    }
}

TEST_CASE("evaluate") {
    const auto spec = small_spec();
    const auto data = small_dataset(spec);

    SUBCASE("identical predictions across roles give zero robustness variance") {
        // Zeroed adapters make every role path the identity, so with noise 0
        // all roles score identically.
        auto zero_spec = spec;
        zero_spec.noise_scale = 0.0;
        const auto zero_data = small_dataset(zero_spec);
        auto params = init_params(zero_data.dim(), 6, zero_data.num_levels(), 1);
        for (auto& a : params.agent_adapters) {
            a.w_down.setZero();
            a.w_up.setZero();
        }
        params.shared_adapter.w_down.setZero();
        params.shared_adapter.w_up.setZero();
        const auto out = evaluate(params, "full", zero_data, {10});
        CHECK(out.report.vndcg.at(10) == 0.0);
        CHECK(out.report.vnap == 0.0);
    }
    SUBCASE("untrained checkpoint ranks near the shuffled baseline") {
        const auto params = init_params(data.dim(), 6, data.num_levels(), 77);
        const auto out = evaluate(params, "full", data, {10});
        double untrained = 0.0;
        for (const auto& run : out.report.runs) untrained += run.ndcg.at(10);
        untrained /= static_cast<double>(out.report.runs.size());

        // Shuffle oracle: mean NDCG@10 of random permutations of each query's
        // docs, accumulated over many trials.
        Rng rng(123);
        double baseline = 0.0;
        int trials = 0;
        for (int t = 0; t < 50; ++t) {
            for (const auto& [qid, docs] : data.qrels.all()) {
                std::vector<std::string> order;
                for (const auto& [docid, grade] : docs) order.push_back(docid);
                for (std::size_t i = order.size(); i > 1; --i) {
                    std::swap(order[i - 1], order[rng.below(i)]);
                }
                baseline += ndcg_at_n(order, data.qrels, qid, 10);
                ++trials;
            }
        }
        baseline /= trials;
        CHECK(untrained == doctest::Approx(baseline).epsilon(0.12));
    }
    SUBCASE("trained checkpoint beats the untrained one") {
        auto config = small_config();
        config.epochs = 12;
        const auto trained = train(data, config);
        const auto before = evaluate(init_params(data.dim(), config.bottleneck,
                                                 data.num_levels(), config.seed),
                                     "full", data, {10});
        const auto after = evaluate(trained.params, "full", data, {10});
        double ndcg_before = 0.0, ndcg_after = 0.0;
        for (const auto& run : before.report.runs) ndcg_before += run.ndcg.at(10);
        for (const auto& run : after.report.runs) ndcg_after += run.ndcg.at(10);
        CHECK(ndcg_after > ndcg_before);
    }
    SUBCASE("dimension mismatch rejected") {
        const auto params = init_params(data.dim() + 2, 6, data.num_levels(), 1);
        CHECK_THROWS_AS(evaluate(params, "full", data, {10}), DataError);
    }
    SUBCASE("report survives a json round trip") {
        const auto params = init_params(data.dim(), 6, data.num_levels(), 2);
        const auto out = evaluate(params, "full", data, {5, 10});
        const std::string json = report_to_json(out.report);
        CHECK(report_to_json(report_from_json(json)) == json);
    }
}

TEST_CASE("ablate directional contrast") {
    SyntheticSpec spec;
    spec.num_queries = 100;
    spec.docs_per_query = 10;
    spec.dim = 16;
    spec.noise_scale = 0.3;
    spec.seed = 5;
    const auto data = small_dataset(spec);
    TrainConfig config;
    config.bottleneck = 8;
    config.epochs = 20;
    config.batch_size = 32;
    config.alpha = 10.0;
    config.seed = 3;

    const auto rows = ablate(data, config, {10});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].mode == AblationMode::Full);
    CHECK(rows[1].mode == AblationMode::NoRobustLoss);
    CHECK(rows[2].mode == AblationMode::NoMmoe);
    CHECK(rows[3].mode == AblationMode::Neither);
    // the robust loss drives the variance down without giving up effectiveness
    CHECK(rows[0].report.vndcg.at(10) < rows[1].report.vndcg.at(10));
    double full_ndcg = 0.0, wol_ndcg = 0.0;
    for (const auto& run : rows[0].report.runs) full_ndcg += run.ndcg.at(10);
    for (const auto& run : rows[1].report.runs) wol_ndcg += run.ndcg.at(10);
    CHECK(full_ndcg > 0.98 * wol_ndcg);
}

TEST_CASE("ablate mode algebra and serialization") {
    const auto data = small_dataset(small_spec());
    auto config = small_config();
    config.epochs = 10;
    config.alpha = 10.0;
    const auto rows = ablate(data, config, {10});
    REQUIRE(rows.size() == 4);

    SUBCASE("mode composition: wo-nl equals wo-n with alpha forced to 0") {
        auto wn0 = config;
        wn0.alpha = 0.0;
        wn0.ablation_mode = AblationMode::NoMmoe;
        const auto direct = train(data, wn0);
        auto neither_cfg = config;
        neither_cfg.ablation_mode = AblationMode::Neither;
        const auto neither = train(data, neither_cfg);
        CHECK(serialize_params(direct.params, "x") == serialize_params(neither.params, "x"));
    }
    SUBCASE("csv and json shapes") {
        const auto csv = ablation_to_csv(rows, {10});
        CHECK(csv.find("metric,full,wo-l,wo-n,wo-nl") == 0);
        CHECK(csv.find("vndcg@10(e-5)") != std::string::npos);
        CHECK(ablation_to_json(rows, {10}).find("\"mode\": \"wo-nl\"") != std::string::npos);
    }
    SUBCASE("all four runs carry the same dataset hash") {
        CHECK(!rows[0].data_hash.empty());
        for (const auto& row : rows) {
            CHECK(row.data_hash == rows[0].data_hash);
        }
    }
}

TEST_CASE("sweep_alpha") {
    const auto data = small_dataset(small_spec());
    auto config = small_config();
    config.epochs = 6;

    SUBCASE("alpha 0 reduces to a wo-l run") {
        const auto rows = sweep_alpha(data, config, {0.0});
        REQUIRE(rows.size() == 1);
        auto wol = config;
        wol.ablation_mode = AblationMode::NoRobustLoss;
        const auto direct = train(data, wol);
        const auto report = evaluate(direct.params, "wo-l", data, {10}).report;
        CHECK(rows[0].vndcg10 == report.vndcg.at(10));
        CHECK(rows[0].ndcg10 ==
              doctest::Approx([&] {
                  double s = 0.0;
                  for (const auto& run : report.runs) s += run.ndcg.at(10);
                  return s / static_cast<double>(report.runs.size());
              }()).epsilon(1e-15));
    }
    SUBCASE("default grid emits six rows") {
        const auto rows = sweep_alpha(data, config, {5, 10, 15, 20, 25, 30});
        CHECK(rows.size() == 6);
        const auto csv = sweep_to_csv(rows);
        CHECK(csv.find("alpha,ndcg@10,map,vndcg@10,vnap") == 0);
        int lines = 0;
        for (char c : csv) lines += c == '\n' ? 1 : 0;
        CHECK(lines == 7);  // header + 6 rows
    }
    SUBCASE("empty alpha list rejected; negative alpha rejected") {
        CHECK_THROWS_AS(sweep_alpha(data, config, {}), UsageError);
        CHECK_THROWS_AS(sweep_alpha(data, config, {-1.0}), UsageError);
    }
}

TEST_CASE("scoring scalarization is consistent between evaluate and expected_grade") {
    VecX p(3);
    p << 0.1, 0.2, 0.7;
    CHECK(expected_grade(p) == doctest::Approx(0.2 + 1.4).epsilon(1e-12));
}
