#include "rrank/harness/synthetic.hpp"

#include <cmath>

#include "rrank/errors.hpp"
#include "rrank/math.hpp"
#include "rrank/rng.hpp"

namespace rrank {

namespace {

// Stream ids for independent substreams of one dataset seed.
constexpr std::uint64_t kStreamRoles = 1;
constexpr std::uint64_t kStreamScoreDir = 2;
constexpr std::uint64_t kStreamPair = 3;

// Grade labels carry noise the embeddings cannot explain, keeping NDCG off
// the ceiling where per-role differences would be compressed away.
constexpr double kLabelNoise = 0.5;

// Normal-quantile grade thresholds giving equal mass per level.
std::vector<double> grade_thresholds(int levels) {
    // Phi^{-1}(k/L) for k = 1..L-1.
    static const double kTerciles[] = {-0.4307272992954576, 0.4307272992954576};
    static const double kQuintiles[] = {-0.8416212335729142, -0.2533471031357997,
                                        0.2533471031357997, 0.8416212335729142};
    if (levels == 3) return {kTerciles[0], kTerciles[1]};
    return {kQuintiles[0], kQuintiles[1], kQuintiles[2], kQuintiles[3]};
}

VecX draw_normal(Rng& rng, int n, double scale) {
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal() * scale;
    return v;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.num_queries < 1 || spec.docs_per_query < 1 || spec.dim < 2 ||
        (spec.num_levels != 3 && spec.num_levels != 5) || spec.noise_scale < 0.0) {
        throw DataError("invalid synthetic spec");
    }

    SyntheticData data;
    data.qrels = Qrels(spec.num_levels);

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(spec.dim));

    // Fixed score direction and per-role distortion directions.
    Rng dir_rng(mix64(spec.seed, kStreamScoreDir));
    const VecX score_dir = draw_normal(dir_rng, spec.dim, inv_sqrt_d);

    // Per-role distortion matrices, scaled so |G_k z| is comparable to |z|.
    // The original role (k=0) is undistorted.
    Rng role_rng(mix64(spec.seed, kStreamRoles));
    std::vector<MatX> role_shear(kNumRoles);
    for (int k = 0; k < kNumRoles; ++k) {
        MatX g(spec.dim, spec.dim);
        for (int r = 0; r < spec.dim; ++r) {
            for (int c = 0; c < spec.dim; ++c) {
                g(r, c) = role_rng.normal() * inv_sqrt_d;
            }
        }
        role_shear[static_cast<std::size_t>(k)] = k == 0 ? MatX::Zero(spec.dim, spec.dim) : g;
    }

    const auto thresholds = grade_thresholds(spec.num_levels);

    for (int i = 0; i < spec.num_queries; ++i) {
        const std::string qid = "q" + std::to_string(i + 1);
        Query q;
        q.qid = qid;
        q.text = "synthetic query " + std::to_string(i + 1);
        q.role = Role::Original;
        data.queries.add(q);

        for (Role role : kAllRoles) {
            if (role == Role::Original) continue;
            RewriteRecord r;
            r.qid = qid;
            r.role = role;
            r.original_text = q.text;
            r.rewritten_text = "synthetic query " + std::to_string(i + 1) + " (" +
                               role_name(role) + " phrasing)";
            r.intent_summary = "synthetic intent " + std::to_string(i + 1);
            r.iterations = 1;
            r.s0 = 1;
            r.s1 = 1;
            r.status = RewriteStatus::Accepted;
            data.rewrites.push_back(std::move(r));
        }

        for (int j = 0; j < spec.docs_per_query; ++j) {
            const std::string docid = "d" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
            Rng pair_rng(mix64(spec.seed, kStreamPair, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(j)));
            const VecX latent = draw_normal(pair_rng, spec.dim, 1.0);

            // Grade = quantized latent score plus unexplainable label noise,
            // standardized so the quantile thresholds stay exact.
            const double score = (score_dir.dot(latent) + kLabelNoise * pair_rng.normal()) /
                                 std::sqrt(1.0 + kLabelNoise * kLabelNoise);
            int grade = 0;
            for (double t : thresholds) {
                if (score > t) ++grade;
            }
            data.qrels.set(qid, docid, grade);

            for (Role role : kAllRoles) {
                const int k = role_index(role);
                const VecX noise = draw_normal(pair_rng, spec.dim, 1.0);
                PairEmbedding e;
                e.qid = qid;
                e.docid = docid;
                e.role = role;
                e.vec = latent +
                        spec.noise_scale *
                            (role_shear[static_cast<std::size_t>(k)] * latent + 0.5 * noise);
                if (spec.noise_scale == 0.0) {
                    e.vec = latent;
                }
                data.embeddings.add(std::move(e));
            }
        }
    }
    return data;
}

}  // namespace rrank
