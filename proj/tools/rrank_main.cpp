// rrank: query rewriting with persona agents + robust MMoE ranking head.
// Subcommands: gen-synth, rewrite, judge, train, eval, ablate, sweep.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrank/core/io.hpp"
#include "rrank/errors.hpp"
#include "rrank/harness/evaluate.hpp"
#include "rrank/harness/synthetic.hpp"
#include "rrank/harness/train.hpp"
#include "rrank/hash.hpp"
#include "rrank/metrics/metrics.hpp"
#include "rrank/provenance.hpp"
#include "rrank/rewrite/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct BackendOptions {
    std::string kind = "mock";
    std::string endpoint;
    std::string model;
    std::string auth_env = "RRANK_API_KEY";
    double temperature = 0.0;
    int max_tokens = 256;
    int retries = 3;
    int timeout_seconds = 30;
};

void add_backend_options(CLI::App* cmd, BackendOptions& opts) {
    cmd->add_option("--backend", opts.kind, "LLM backend: mock or http")
        ->check(CLI::IsMember({"mock", "http"}))
        ->capture_default_str();
    cmd->add_option("--endpoint", opts.endpoint, "HTTP backend URL (chat-completions style)");
    cmd->add_option("--model", opts.model, "Model name sent to the HTTP backend");
    cmd->add_option("--auth-env", opts.auth_env,
                    "Environment variable holding the bearer token")
        ->capture_default_str();
    cmd->add_option("--temperature", opts.temperature, "Sampling temperature")
        ->capture_default_str();
    cmd->add_option("--max-tokens", opts.max_tokens, "Completion token cap")
        ->capture_default_str();
    cmd->add_option("--retries", opts.retries, "Backend retry budget")->capture_default_str();
    cmd->add_option("--timeout", opts.timeout_seconds, "HTTP timeout in seconds")
        ->capture_default_str();
}

std::shared_ptr<rrank::Backend> make_backend(const BackendOptions& opts) {
    std::shared_ptr<rrank::Backend> inner;
    if (opts.kind == "mock") {
        inner = std::make_shared<rrank::MockBackend>();
    } else {
        if (opts.endpoint.empty()) {
            throw rrank::UsageError("--endpoint is required with --backend http");
        }
        rrank::HttpBackendConfig config;
        config.endpoint = opts.endpoint;
        config.model = opts.model;
        config.auth_env = opts.auth_env;
        config.temperature = opts.temperature;
        config.timeout_seconds = opts.timeout_seconds;
        inner = std::make_shared<rrank::HttpBackend>(config);
    }
    return std::make_shared<rrank::RetryingBackend>(inner, opts.retries, opts.kind == "mock" ? 0 : 100);
}

std::vector<rrank::Role> parse_roles(const std::string& csv) {
    std::vector<rrank::Role> roles;
    std::string token;
    std::istringstream ss(csv);
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) roles.push_back(rrank::role_from_name(token));
    }
    if (roles.empty()) {
        throw rrank::UsageError("role list is empty");
    }
    return roles;
}

// ---- flat config files -------------------------------------------------------
//
// `--config FILE` reads one flat `key=value` document whose keys are the long
// option names of the invoked subcommand. The pairs are spliced into argv
// right after the subcommand token, so flags given on the command line
// override the file (every scalar option takes its last occurrence).

std::map<std::string, std::string> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw rrank::UsageError("cannot open config file: " + path);
    }
    std::map<std::string, std::string> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw rrank::UsageError(path + ": line " + std::to_string(line_no) +
                                    ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return values;
}

std::vector<std::string> apply_config_to_args(const std::vector<std::string>& argv_in) {
    std::vector<std::string> args;
    std::string config_path;
    for (std::size_t i = 0; i < argv_in.size(); ++i) {
        const std::string& token = argv_in[i];
        if (token == "--config") {
            if (i + 1 >= argv_in.size()) {
                throw rrank::UsageError("--config needs a file path");
            }
            config_path = argv_in[++i];
        } else if (token.rfind("--config=", 0) == 0) {
            config_path = token.substr(9);
        } else {
            args.push_back(token);
        }
    }
    if (config_path.empty()) {
        return args;
    }
    if (args.empty() || args[0].rfind("-", 0) == 0) {
        throw rrank::UsageError("--config requires a subcommand");
    }
    const auto values = read_flat_config(config_path);
    std::vector<std::string> spliced;
    spliced.push_back(args[0]);
    for (const auto& [key, value] : values) {
        spliced.push_back("--" + key + "=" + value);
    }
    spliced.insert(spliced.end(), args.begin() + 1, args.end());
    return spliced;
}

void add_config_help(CLI::App* cmd) {
    // recognized for help only; the token is consumed before CLI11 parses
    static std::string ignored;
    cmd->add_option("--config", ignored, "Flat key=value config file; flags override it");
}

void scalar_options_take_last(CLI::App* cmd) {
    for (auto* opt : cmd->get_options()) {
        if (opt->get_expected_max() <= 1) {
            opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
    }
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw rrank::DataError("cannot create output directory '" + out + "': " + ec.message());
    }
    return dir;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw rrank::DataError("cannot write " + path.string());
    }
    out << content;
}

// ---- gen-synth ------------------------------------------------------------

struct GenSynthArgs {
    rrank::SyntheticSpec spec;
    std::string out;
};

int run_gen_synth(const GenSynthArgs& args) {
    const auto data = rrank::generate_synthetic(args.spec);
    const fs::path dir = ensure_out_dir(args.out);
    rrank::save_queries(data.queries, (dir / "queries.tsv").string());
    rrank::save_rewrites(data.rewrites, (dir / "rewrites.jsonl").string());
    rrank::save_qrels(data.qrels, (dir / "qrels.txt").string());
    rrank::save_embeddings(data.embeddings, (dir / "embeddings.jsonl").string());

    rrank::Provenance prov;
    prov.subcommand = "gen-synth";
    prov.seed = args.spec.seed;
    prov.parameters = {
        {"queries", std::to_string(args.spec.num_queries)},
        {"docs", std::to_string(args.spec.docs_per_query)},
        {"dim", std::to_string(args.spec.dim)},
        {"levels", std::to_string(args.spec.num_levels)},
        {"noise", rrank::format_double(args.spec.noise_scale)},
    };
    for (const char* name : {"queries.tsv", "rewrites.jsonl", "qrels.txt", "embeddings.jsonl"}) {
        prov.inputs["out/" + std::string(name)] = rrank::hash_file_hex((dir / name).string());
    }
    rrank::save_provenance(prov, dir.string());
    std::cout << "generated " << data.embeddings.size() << " embeddings for "
              << args.spec.num_queries << " queries x " << args.spec.docs_per_query
              << " docs x " << rrank::kNumRoles << " roles -> " << dir.string() << "\n";
    return 0;
}

// ---- rewrite ----------------------------------------------------------------

struct RewriteArgs {
    std::string queries_path;
    std::string roles_csv = "woman,man,student,elder";
    BackendOptions backend;
    rrank::PipelineConfig pipeline;
    std::uint64_t seed = 42;
    std::string out;
};

int run_rewrite(const RewriteArgs& args) {
    const auto queries = rrank::load_queries(args.queries_path);
    const auto roles = parse_roles(args.roles_csv);
    auto backend = make_backend(args.backend);

    rrank::PipelineConfig config = args.pipeline;
    config.temperature = args.backend.temperature;
    config.max_tokens = args.backend.max_tokens;
    config.retry_budget = args.backend.retries;

    const auto result = rrank::rewrite_all(queries, roles, *backend, config);

    const fs::path dir = ensure_out_dir(args.out);
    rrank::save_rewrites(result.records, (dir / "rewrites.jsonl").string());
    rrank::save_transcript(result.transcript, (dir / "transcript.jsonl").string());

    rrank::Provenance prov;
    prov.subcommand = "rewrite";
    prov.seed = args.seed;
    prov.inputs[args.queries_path] = rrank::hash_file_hex(args.queries_path);
    prov.parameters = {
        {"backend", args.backend.kind},
        {"roles", args.roles_csv},
        {"max_iters", std::to_string(config.max_iters)},
        {"retries", std::to_string(config.retry_budget)},
        {"strict", config.strict ? "true" : "false"},
        {"jobs", std::to_string(config.jobs)},
    };
    rrank::save_provenance(prov, dir.string());

    int accepted = 0;
    for (const auto& r : result.records) {
        if (r.status == rrank::RewriteStatus::Accepted) ++accepted;
    }
    std::cout << "rewrote " << result.records.size() << " (query, role) pairs, " << accepted
              << " accepted, " << (result.records.size() - accepted) << " fell back -> "
              << dir.string() << "\n";
    return 0;
}

// ---- judge ------------------------------------------------------------------

struct JudgeArgs {
    std::string rewrites_path;
    BackendOptions backend;
    std::uint64_t seed = 42;
    std::string out;
};

int run_judge(const JudgeArgs& args) {
    const auto records = rrank::load_rewrites(args.rewrites_path);
    auto backend = make_backend(args.backend);
    rrank::PipelineConfig config;
    config.temperature = args.backend.temperature;
    config.max_tokens = args.backend.max_tokens;

    std::string scores_jsonl;
    std::vector<rrank::TranscriptEntry> transcript;
    // role -> histogram[0..5] for each axis
    std::map<std::string, std::array<std::array<int, 6>, 2>> histograms;

    for (const auto& rec : records) {
        rrank::Query original;
        original.qid = rec.qid;
        original.text = rec.original_text;
        const auto scores =
            rrank::judge_quality(original, rec.rewritten_text, rec.role, *backend, config,
                                 &transcript);
        ordered_json j;
        j["qid"] = rec.qid;
        j["role"] = rrank::role_name(rec.role);
        j["semantic"] = scores.semantic;
        j["persona"] = scores.persona;
        scores_jsonl += j.dump();
        scores_jsonl += '\n';
        auto& hist = histograms[rrank::role_name(rec.role)];
        hist[0][static_cast<std::size_t>(scores.semantic)] += 1;
        hist[1][static_cast<std::size_t>(scores.persona)] += 1;
    }

    const fs::path dir = ensure_out_dir(args.out);
    write_text(dir / "judge_scores.jsonl", scores_jsonl);

    ordered_json summary;
    summary["records"] = records.size();
    ordered_json per_role;
    for (const auto& [role, hist] : histograms) {
        per_role[role] = {{"semantic", hist[0]}, {"persona", hist[1]}};
    }
    summary["histograms"] = std::move(per_role);
    write_text(dir / "judge_summary.json", summary.dump(2) + "\n");
    rrank::save_transcript(transcript, (dir / "transcript.jsonl").string());

    rrank::Provenance prov;
    prov.subcommand = "judge";
    prov.seed = args.seed;
    prov.inputs[args.rewrites_path] = rrank::hash_file_hex(args.rewrites_path);
    prov.parameters = {{"backend", args.backend.kind}};
    rrank::save_provenance(prov, dir.string());
    std::cout << "judged " << records.size() << " rewrites -> " << dir.string() << "\n";
    return 0;
}

// ---- train-family shared loading ---------------------------------------------

struct DataArgs {
    std::string embeddings_path;
    std::string qrels_path;
    int levels = 3;
    std::string roles_csv = "original,woman,man,student,elder";
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--embeddings", args.embeddings_path, "Embeddings JSONL")->required();
    cmd->add_option("--qrels", args.qrels_path, "TREC qrels file")->required();
    cmd->add_option("--levels", args.levels, "Relevance levels (3 or 5)")
        ->check(CLI::IsMember({3, 5}))
        ->capture_default_str();
    cmd->add_option("--roles", args.roles_csv, "Comma-separated role list")
        ->capture_default_str();
}

rrank::Dataset load_dataset(const DataArgs& args) {
    auto embeddings = rrank::load_embeddings(args.embeddings_path);
    auto qrels = rrank::load_qrels(args.qrels_path, args.levels);
    return rrank::build_dataset(std::move(embeddings), std::move(qrels),
                                parse_roles(args.roles_csv));
}

struct TrainArgs {
    DataArgs data;
    rrank::TrainConfig config;
    std::string mode = "full";
    bool exclude_original_robust = false;
    std::string out;
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
    add_data_options(cmd, args.data);
    cmd->add_option("--bottleneck", args.config.bottleneck, "Adapter bottleneck width")
        ->capture_default_str();
    cmd->add_option("--alpha", args.config.alpha, "Robust loss weight")->capture_default_str();
    cmd->add_option("--epsilon", args.config.epsilon, "Probability clamp")->capture_default_str();
    cmd->add_option("--lr", args.config.learning_rate, "Learning rate")->capture_default_str();
    cmd->add_option("--momentum", args.config.momentum, "Momentum (0 disables)")
        ->capture_default_str();
    cmd->add_option("--epochs", args.config.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--batch", args.config.batch_size, "Groups per batch")->capture_default_str();
    cmd->add_option("--mode", args.mode, "Ablation mode: full, wo-l, wo-n, wo-nl")
        ->check(CLI::IsMember({"full", "wo-l", "wo-n", "wo-nl"}))
        ->capture_default_str();
    cmd->add_flag("--exclude-original-robust", args.exclude_original_robust,
                  "Drop the original role from the robust-loss pairs");
    cmd->add_flag("--midpoint-js", args.config.midpoint_js,
                  "Use the bounded mixture-midpoint divergence");
    cmd->add_option("--seed", args.config.seed, "RNG seed")->capture_default_str();
}

rrank::TrainConfig resolve_train_config(const TrainArgs& args) {
    rrank::TrainConfig config = args.config;
    config.ablation_mode = rrank::ablation_mode_from_name(args.mode);
    config.include_original_in_robust = !args.exclude_original_robust;
    return config;
}

std::map<std::string, std::string> train_parameters(const rrank::TrainConfig& c) {
    return {
        {"bottleneck", std::to_string(c.bottleneck)},
        {"alpha", rrank::format_double(c.alpha)},
        {"epsilon", rrank::format_double(c.epsilon)},
        {"lr", rrank::format_double(c.learning_rate)},
        {"momentum", rrank::format_double(c.momentum)},
        {"epochs", std::to_string(c.epochs)},
        {"batch", std::to_string(c.batch_size)},
        {"mode", rrank::ablation_mode_name(c.ablation_mode)},
        {"include_original_in_robust", c.include_original_in_robust ? "true" : "false"},
        {"midpoint_js", c.midpoint_js ? "true" : "false"},
    };
}

int run_train(const TrainArgs& args) {
    const auto data = load_dataset(args.data);
    const auto config = resolve_train_config(args);
    const auto result = rrank::train(data, config);

    const fs::path dir = ensure_out_dir(args.out);
    rrank::save_params(result.params, rrank::ablation_mode_name(config.ablation_mode),
                       (dir / "checkpoint.json").string());
    write_text(dir / "loss_curve.csv", rrank::serialize_loss_curve(result.loss_curve));

    rrank::Provenance prov;
    prov.subcommand = "train";
    prov.seed = config.seed;
    prov.inputs[args.data.embeddings_path] = rrank::hash_file_hex(args.data.embeddings_path);
    prov.inputs[args.data.qrels_path] = rrank::hash_file_hex(args.data.qrels_path);
    prov.parameters = train_parameters(config);
    prov.data_hash = rrank::dataset_hash(data);
    rrank::save_provenance(prov, dir.string());

    std::cout << "trained " << rrank::ablation_mode_name(config.ablation_mode) << " for "
              << config.epochs << " epochs; final total loss "
              << rrank::format_double(result.loss_curve.back().total) << " -> " << dir.string()
              << "\n";
    return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint_path;
    std::vector<std::string> run_paths;
    DataArgs data;
    std::string qrels_path;  // runs mode
    int levels = 3;
    std::string ns_csv = "10,20";
    std::uint64_t seed = 42;
    std::string out;
};

std::vector<int> parse_ns(const std::string& csv) {
    std::vector<int> ns;
    std::istringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        ns.push_back(std::stoi(token));
        if (ns.back() < 1) {
            throw rrank::UsageError("--n values must be >= 1");
        }
    }
    if (ns.empty()) {
        throw rrank::UsageError("--n list is empty");
    }
    return ns;
}

int run_eval(const EvalArgs& args) {
    const auto ns = parse_ns(args.ns_csv);
    const fs::path dir = ensure_out_dir(args.out);

    rrank::Provenance prov;
    prov.subcommand = "eval";
    prov.seed = args.seed;

    rrank::MetricReport report;
    if (!args.checkpoint_path.empty()) {
        std::string mode;
        const auto params = rrank::load_params(args.checkpoint_path, &mode);
        const auto data = load_dataset(args.data);
        auto output = rrank::evaluate(params, mode, data, ns);
        for (const auto& run : output.runs) {
            rrank::save_run(run, (dir / ("run_" + rrank::role_name(run.role) + ".run")).string());
        }
        report = std::move(output.report);
        prov.inputs[args.checkpoint_path] = rrank::hash_file_hex(args.checkpoint_path);
        prov.inputs[args.data.embeddings_path] = rrank::hash_file_hex(args.data.embeddings_path);
        prov.inputs[args.data.qrels_path] = rrank::hash_file_hex(args.data.qrels_path);
        prov.data_hash = rrank::dataset_hash(data);
    } else {
        std::vector<rrank::RankedRun> runs;
        for (const auto& path : args.run_paths) {
            runs.push_back(rrank::load_run(path));
            prov.inputs[path] = rrank::hash_file_hex(path);
        }
        const auto qrels = rrank::load_qrels(args.qrels_path, args.levels);
        prov.inputs[args.qrels_path] = rrank::hash_file_hex(args.qrels_path);
        report = rrank::metric_report(runs, qrels, ns);
    }

    write_text(dir / "report.json", rrank::report_to_json(report));
    write_text(dir / "report.txt", rrank::report_to_text(report));
    prov.parameters = {{"n", args.ns_csv}};
    rrank::save_provenance(prov, dir.string());
    std::cout << rrank::report_to_text(report);
    return 0;
}

// ---- ablate -------------------------------------------------------------------

struct AblateArgs {
    TrainArgs train;
    std::string ns_csv = "10,20";
};

int run_ablate(const AblateArgs& args) {
    const auto ns = parse_ns(args.ns_csv);
    const auto data = load_dataset(args.train.data);
    const auto base = resolve_train_config(args.train);
    const auto rows = rrank::ablate(data, base, ns);

    const fs::path dir = ensure_out_dir(args.train.out);
    write_text(dir / "ablation.csv", rrank::ablation_to_csv(rows, ns));
    write_text(dir / "ablation.json", rrank::ablation_to_json(rows, ns));
    for (const auto& row : rows) {
        write_text(dir / ("report_" + rrank::ablation_mode_name(row.mode) + ".json"),
                   rrank::report_to_json(row.report));
    }

    rrank::Provenance prov;
    prov.subcommand = "ablate";
    prov.seed = base.seed;
    prov.inputs[args.train.data.embeddings_path] =
        rrank::hash_file_hex(args.train.data.embeddings_path);
    prov.inputs[args.train.data.qrels_path] = rrank::hash_file_hex(args.train.data.qrels_path);
    prov.parameters = train_parameters(base);
    prov.data_hash = rrank::dataset_hash(data);
    rrank::save_provenance(prov, dir.string());

    std::cout << rrank::ablation_to_csv(rows, ns);
    return 0;
}

// ---- sweep ---------------------------------------------------------------------

struct SweepArgs {
    TrainArgs train;
    std::string alphas_csv = "5,10,15,20,25,30";
};

int run_sweep(const SweepArgs& args) {
    std::vector<double> alphas;
    {
        std::istringstream ss(args.alphas_csv);
        std::string token;
        while (std::getline(ss, token, ',')) {
            if (!token.empty()) alphas.push_back(std::stod(token));
        }
    }
    const auto data = load_dataset(args.train.data);
    const auto base = resolve_train_config(args.train);
    const auto rows = rrank::sweep_alpha(data, base, alphas);

    const fs::path dir = ensure_out_dir(args.train.out);
    write_text(dir / "sweep.csv", rrank::sweep_to_csv(rows));
    write_text(dir / "sweep.json", rrank::sweep_to_json(rows));

    rrank::Provenance prov;
    prov.subcommand = "sweep";
    prov.seed = base.seed;
    prov.inputs[args.train.data.embeddings_path] =
        rrank::hash_file_hex(args.train.data.embeddings_path);
    prov.inputs[args.train.data.qrels_path] = rrank::hash_file_hex(args.train.data.qrels_path);
    prov.parameters = train_parameters(base);
    prov.parameters["alphas"] = args.alphas_csv;
    prov.data_hash = rrank::dataset_hash(data);
    rrank::save_provenance(prov, dir.string());

    std::cout << rrank::sweep_to_csv(rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rrank: persona-agent query rewriting and robust MMoE ranking"};
    app.require_subcommand(1);

    GenSynthArgs gen_args;
    auto* gen = app.add_subcommand("gen-synth", "Generate a deterministic synthetic dataset");
    add_config_help(gen);
    gen->add_option("--queries", gen_args.spec.num_queries, "Number of queries")
        ->capture_default_str();
    gen->add_option("--docs", gen_args.spec.docs_per_query, "Documents per query")
        ->capture_default_str();
    gen->add_option("--dim", gen_args.spec.dim, "Embedding dimension")->capture_default_str();
    gen->add_option("--levels", gen_args.spec.num_levels, "Relevance levels (3 or 5)")
        ->check(CLI::IsMember({3, 5}))
        ->capture_default_str();
    gen->add_option("--noise", gen_args.spec.noise_scale, "Role perturbation scale")
        ->capture_default_str();
    gen->add_option("--seed", gen_args.spec.seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", gen_args.out, "Output directory")->required();

    RewriteArgs rewrite_args;
    auto* rewrite = app.add_subcommand("rewrite", "Rewrite queries with persona agents");
    add_config_help(rewrite);
    rewrite->add_option("--queries", rewrite_args.queries_path, "Queries TSV")->required();
    rewrite->add_option("--roles", rewrite_args.roles_csv, "Comma-separated persona roles")
        ->capture_default_str();
    add_backend_options(rewrite, rewrite_args.backend);
    rewrite->add_option("--max-iters", rewrite_args.pipeline.max_iters,
                        "Generate+check rounds per (query, role)")
        ->capture_default_str();
    rewrite->add_flag("--strict", rewrite_args.pipeline.strict,
                      "Accept only exact matches (both scores 1)");
    rewrite->add_option("--jobs", rewrite_args.pipeline.jobs, "Concurrent pipelines")
        ->capture_default_str();
    rewrite->add_option("--seed", rewrite_args.seed, "Recorded in provenance")
        ->capture_default_str();
    rewrite->add_option("--out", rewrite_args.out, "Output directory")->required();

    JudgeArgs judge_args;
    auto* judge = app.add_subcommand("judge", "Score finished rewrites on a 0-5 scale");
    add_config_help(judge);
    judge->add_option("--rewrites", judge_args.rewrites_path, "Rewrites JSONL")->required();
    add_backend_options(judge, judge_args.backend);
    judge->add_option("--seed", judge_args.seed, "Recorded in provenance")->capture_default_str();
    judge->add_option("--out", judge_args.out, "Output directory")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train the robust ranking head");
    add_config_help(train);
    add_train_options(train, train_args);
    train->add_option("--out", train_args.out, "Output directory")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint or existing run files");
    add_config_help(eval);
    eval->add_option("--checkpoint", eval_args.checkpoint_path, "Checkpoint JSON");
    eval->add_option("--runs", eval_args.run_paths, "TREC run files (one per agent)");
    eval->add_option("--embeddings", eval_args.data.embeddings_path,
                     "Embeddings JSONL (checkpoint mode)");
    eval->add_option("--qrels", eval_args.qrels_path, "TREC qrels file")->required();
    eval->add_option("--levels", eval_args.levels, "Relevance levels (3 or 5)")
        ->check(CLI::IsMember({3, 5}))
        ->capture_default_str();
    eval->add_option("--roles", eval_args.data.roles_csv, "Roles (checkpoint mode)")
        ->capture_default_str();
    eval->add_option("--n", eval_args.ns_csv, "NDCG cutoffs, comma separated")
        ->capture_default_str();
    eval->add_option("--seed", eval_args.seed, "Recorded in provenance")->capture_default_str();
    eval->add_option("--out", eval_args.out, "Output directory")->required();

    AblateArgs ablate_args;
    auto* ablate = app.add_subcommand("ablate", "Run full, wo-l, wo-n and wo-nl on one dataset");
    add_config_help(ablate);
    add_train_options(ablate, ablate_args.train);
    ablate->add_option("--n", ablate_args.ns_csv, "NDCG cutoffs")->capture_default_str();
    ablate->add_option("--out", ablate_args.train.out, "Output directory")->required();

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Sweep the robustness weight alpha");
    add_config_help(sweep);
    add_train_options(sweep, sweep_args.train);
    sweep->add_option("--alphas", sweep_args.alphas_csv, "Alpha values, comma separated")
        ->capture_default_str();
    sweep->add_option("--out", sweep_args.train.out, "Output directory")->required();

    for (auto* cmd : {gen, rewrite, judge, train, eval, ablate, sweep}) {
        scalar_options_take_last(cmd);
    }

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_to_args(args);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error class=usage: " << e.what() << "\n";
        return 2;
    } catch (const rrank::UsageError& e) {
        std::cerr << "error class=usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) return run_gen_synth(gen_args);
        if (rewrite->parsed()) return run_rewrite(rewrite_args);
        if (judge->parsed()) return run_judge(judge_args);
        if (train->parsed()) return run_train(train_args);
        if (eval->parsed()) {
            if (eval_args.checkpoint_path.empty() == eval_args.run_paths.empty()) {
                throw rrank::UsageError("eval needs exactly one of --checkpoint or --runs");
            }
            if (!eval_args.checkpoint_path.empty() && eval_args.data.embeddings_path.empty()) {
                throw rrank::UsageError("--embeddings is required with --checkpoint");
            }
            eval_args.data.qrels_path = eval_args.qrels_path;
            eval_args.data.levels = eval_args.levels;
            return run_eval(eval_args);
        }
        if (ablate->parsed()) return run_ablate(ablate_args);
        if (sweep->parsed()) return run_sweep(sweep_args);
        throw rrank::UsageError("no subcommand given");
    } catch (const rrank::UsageError& e) {
        std::cerr << "error class=usage: " << e.what() << "\n";
        return 2;
    } catch (const rrank::BackendError& e) {
        std::cerr << "error class=backend: " << e.what() << "\n";
        return 4;
    } catch (const rrank::DataError& e) {
        std::cerr << "error class=data: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error class=internal: " << e.what() << "\n";
        return 1;
    }
}
