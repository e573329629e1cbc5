#include "rrank/core/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rrank/errors.hpp"

namespace rrank {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write file: " + path);
    }
    out << content;
    if (!out) {
        throw DataError("write failed: " + path);
    }
}

// Splits into lines on '\n'; a trailing newline does not produce a final
// empty line. '\r' is not stripped: formats are LF-only by contract.
std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(content.substr(start));
            break;
        }
        lines.push_back(content.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) fields.push_back(f);
    return fields;
}

int parse_int_strict(const std::string& s, const std::string& what, std::size_t line_no) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError("line " + std::to_string(line_no) + ": " + what + " is not an integer: '" +
                        s + "'");
    }
    return value;
}

double parse_double_strict(const std::string& s, const std::string& what, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) + ": " + what + " is not a number: '" +
                        s + "'");
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw DataError("cannot format double");
    }
    return std::string(buf, ptr);
}

QuerySet load_queries(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    QuerySet out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw DataError(path + ": line " + std::to_string(i + 1) +
                            ": expected `qid<TAB>text`");
        }
        Query q;
        q.qid = line.substr(0, tab);
        q.text = line.substr(tab + 1);
        q.role = Role::Original;
        try {
            out.add(std::move(q));
        } catch (const DataError& e) {
            throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string serialize_queries(const QuerySet& queries) {
    std::string out;
    for (const auto& q : queries.items()) {
        out += q.qid;
        out += '\t';
        out += q.text;
        out += '\n';
    }
    return out;
}

void save_queries(const QuerySet& queries, const std::string& path) {
    write_file(path, serialize_queries(queries));
}

Qrels load_qrels(const std::string& path, int num_levels) {
    const auto lines = split_lines(read_file(path));
    Qrels out(num_levels);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_ws(lines[i]);
        if (fields.size() != 4) {
            throw DataError(path + ": line " + std::to_string(i + 1) +
                            ": expected 4 fields `qid 0 docid grade`, got " +
                            std::to_string(fields.size()));
        }
        const int grade = parse_int_strict(fields[3], "grade", i + 1);
        try {
            if (out.set(fields[0], fields[2], grade)) {
                ++out.duplicate_warnings;
            }
        } catch (const DataError& e) {
            throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string serialize_qrels(const Qrels& qrels) {
    std::string out;
    for (const auto& [qid, docs] : qrels.all()) {
        for (const auto& [docid, grade] : docs) {
            out += qid;
            out += " 0 ";
            out += docid;
            out += ' ';
            out += std::to_string(grade);
            out += '\n';
        }
    }
    return out;
}

void save_qrels(const Qrels& qrels, const std::string& path) {
    write_file(path, serialize_qrels(qrels));
}

RankedRun load_run(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    RankedRun run;
    bool tag_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_ws(lines[i]);
        if (fields.size() != 6) {
            throw DataError(path + ": line " + std::to_string(i + 1) +
                            ": expected 6 fields `qid Q0 docid rank score tag`");
        }
        ScoredDoc doc;
        doc.docid = fields[2];
        doc.score = parse_double_strict(fields[4], "score", i + 1);
        run.by_qid[fields[0]].push_back(std::move(doc));
        if (!tag_seen) {
            run.tag = fields[5];
            tag_seen = true;
            for (Role r : kAllRoles) {
                if (run.tag.find(role_name(r)) != std::string::npos) {
                    run.role = r;
                    break;
                }
            }
        }
    }
    try {
        run.canonicalize();
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
    return run;
}

std::string serialize_run(const RankedRun& run) {
    std::string out;
    for (const auto& [qid, docs] : run.by_qid) {
        int rank = 1;
        for (const auto& doc : docs) {
            out += qid;
            out += " Q0 ";
            out += doc.docid;
            out += ' ';
            out += std::to_string(rank++);
            out += ' ';
            out += format_double(doc.score);
            out += ' ';
            out += run.tag;
            out += '\n';
        }
    }
    return out;
}

void save_run(const RankedRun& run, const std::string& path) {
    write_file(path, serialize_run(run));
}

std::vector<RewriteRecord> load_rewrites(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    std::vector<RewriteRecord> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
        try {
            RewriteRecord r;
            r.qid = j.at("qid").get<std::string>();
            r.role = role_from_name(j.at("role").get<std::string>());
            r.original_text = j.at("original_text").get<std::string>();
            r.rewritten_text = j.at("rewritten_text").get<std::string>();
            r.intent_summary = j.at("intent_summary").get<std::string>();
            r.iterations = j.at("iterations").get<int>();
            r.s0 = j.at("s0").get<int>();
            r.s1 = j.at("s1").get<int>();
            r.status = rewrite_status_from_name(j.at("status").get<std::string>());
            if (r.iterations < 1) {
                throw DataError("iterations must be >= 1");
            }
            if (r.s0 < -1 || r.s0 > 1 || r.s1 < -1 || r.s1 > 1) {
                throw DataError("scores must be in {-1,0,1}");
            }
            if (r.status == RewriteStatus::Accepted && (r.s0 < 0 || r.s1 < 0)) {
                throw DataError("accepted record with negative score");
            }
            if (r.status == RewriteStatus::FallbackOriginal &&
                r.rewritten_text != r.original_text) {
                throw DataError("fallback record must carry the original text");
            }
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string serialize_rewrites(const std::vector<RewriteRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        ordered_json j;
        j["qid"] = r.qid;
        j["role"] = role_name(r.role);
        j["original_text"] = r.original_text;
        j["rewritten_text"] = r.rewritten_text;
        j["intent_summary"] = r.intent_summary;
        j["iterations"] = r.iterations;
        j["s0"] = r.s0;
        j["s1"] = r.s1;
        j["status"] = rewrite_status_name(r.status);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_rewrites(const std::vector<RewriteRecord>& records, const std::string& path) {
    write_file(path, serialize_rewrites(records));
}

EmbeddingSet load_embeddings(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    EmbeddingSet out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        try {
            const auto j = ordered_json::parse(lines[i]);
            PairEmbedding e;
            e.qid = j.at("qid").get<std::string>();
            e.role = role_from_name(j.at("role").get<std::string>());
            e.docid = j.at("docid").get<std::string>();
            const auto& vec = j.at("vec");
            if (!vec.is_array() || vec.empty()) {
                throw DataError("vec must be a non-empty array");
            }
            e.vec.resize(static_cast<Eigen::Index>(vec.size()));
            for (std::size_t c = 0; c < vec.size(); ++c) {
                e.vec[static_cast<Eigen::Index>(c)] = vec[c].get<double>();
            }
            out.add(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string serialize_embeddings(const EmbeddingSet& embeddings) {
    std::string out;
    for (const auto& e : embeddings.items()) {
        ordered_json j;
        j["qid"] = e.qid;
        j["role"] = role_name(e.role);
        j["docid"] = e.docid;
        auto vec = ordered_json::array();
        for (Eigen::Index i = 0; i < e.vec.size(); ++i) vec.push_back(e.vec[i]);
        j["vec"] = std::move(vec);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_embeddings(const EmbeddingSet& embeddings, const std::string& path) {
    write_file(path, serialize_embeddings(embeddings));
}

}  // namespace rrank
