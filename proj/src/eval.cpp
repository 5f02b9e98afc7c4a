#include "hopchain/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"

namespace hopchain {

std::size_t EvalReport::missing() const {
    return static_cast<std::size_t>(std::count_if(
        per_question.begin(), per_question.end(), [](const auto& kv) { return kv.second.missing; }));
}

namespace {

void finalize(EvalReport& r) {
    r.hits = 0;
    for (const auto& [qid, o] : r.per_question) r.hits += o.hit ? 1 : 0;
    r.retrieval_rate = r.per_question.empty()
                           ? 0.0
                           : static_cast<double>(r.hits) / static_cast<double>(r.per_question.size());
}

}  // namespace

EvalReport gold_retrieval_rate(std::span<const QuestionChains> predictions,
                               std::span<const GoldChain> gold, std::size_t k) {
    if (k < 1) throw PreconditionError("k must be >= 1");
    std::unordered_map<std::string, const QuestionChains*> by_qid;
    for (const auto& p : predictions) by_qid.emplace(p.qid, &p);

    EvalReport report;
    report.k_used = k;
    for (const auto& g : gold) {
        QuestionOutcome o;
        auto it = by_qid.find(g.qid);
        if (it == by_qid.end()) {
            o.missing = true;
        } else {
            const auto& chains = it->second->chains;
            for (std::size_t i = 0; i < chains.size(); ++i) {
                const auto& c = chains[i];
                if ((c.f1 == g.f1 && c.f2 == g.f2) || (c.f1 == g.f2 && c.f2 == g.f1)) {
                    o.rank_of_gold = i + 1;
                    break;
                }
            }
            o.hit = o.rank_of_gold.has_value() && *o.rank_of_gold <= k;
        }
        if (!report.per_question.emplace(g.qid, o).second) {
            throw PreconditionError("gold chain listed twice for question \"" + g.qid + "\"");
        }
    }
    finalize(report);
    return report;
}

ComparisonTable compare_runs(std::span<const NamedReport> reports) {
    ComparisonTable table;
    if (reports.empty()) return table;

    std::set<std::string> reference;
    for (const auto& [qid, o] : reports.front().report.per_question) reference.insert(qid);
    for (std::size_t i = 1; i < reports.size(); ++i) {
        std::set<std::string> other;
        for (const auto& [qid, o] : reports[i].report.per_question) other.insert(qid);
        if (other != reference) {
            std::vector<std::string> diff;
            std::set_symmetric_difference(reference.begin(), reference.end(), other.begin(),
                                          other.end(), std::back_inserter(diff));
            std::string msg = "runs \"" + reports.front().name + "\" and \"" + reports[i].name +
                              "\" cover different questions:";
            for (const auto& q : diff) msg += " " + q;
            throw SetMismatchError(msg);
        }
    }

    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i].report;
        table.rows.push_back({reports[i].name, r.retrieval_rate, r.hits, r.questions(), false});
        if (r.retrieval_rate > table.rows[table.best].rate) table.best = i;
    }
    table.rows[table.best].best = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (std::size_t j = i + 1; j < reports.size(); ++j) {
            table.deltas.push_back({reports[i].name, reports[j].name,
                                    reports[j].report.retrieval_rate - reports[i].report.retrieval_rate});
        }
    }
    return table;
}

std::string format_percent(double fraction, bool signed_value) {
    char buf[32];
    double pct = fraction * 100.0;
    // -0.0 would print as "-0.0"
    if (pct > -0.05 && pct < 0.05) pct = 0.0;
    std::snprintf(buf, sizeof(buf), signed_value ? "%+.1f" : "%.1f", pct);
    return buf;
}

void write_report_json(const EvalReport& report, std::ostream& out, const std::string& config_digest) {
    nlohmann::ordered_json doc;
    doc["k"] = report.k_used;
    doc["questions"] = report.questions();
    doc["hits"] = report.hits;
    doc["retrieval_rate"] = report.retrieval_rate;
    doc["retrieval_rate_pct"] = format_percent(report.retrieval_rate);
    if (!config_digest.empty()) doc["config_digest"] = config_digest;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& [qid, o] : report.per_question) {
        nlohmann::ordered_json e;
        e["hit"] = o.hit;
        e["rank"] = o.rank_of_gold ? nlohmann::ordered_json(*o.rank_of_gold) : nlohmann::ordered_json();
        e["missing"] = o.missing;
        per[qid] = std::move(e);
    }
    doc["per_question"] = std::move(per);
    out << doc.dump(1) << '\n';
}

void write_report_tsv(const EvalReport& report, std::ostream& out) {
    out << "#k=" << report.k_used << '\n';
    for (const auto& [qid, o] : report.per_question) {
        out << qid << '\t' << (o.hit ? 1 : 0) << '\t';
        if (o.rank_of_gold) {
            out << *o.rank_of_gold;
        } else {
            out << '-';
        }
        out << '\t' << (o.missing ? 1 : 0) << '\n';
    }
}

EvalReport read_report(std::istream& in, const std::string& source) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EvalReport r;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            auto doc = nlohmann::json::parse(text);
            r.k_used = doc.at("k").get<std::size_t>();
            for (const auto& [qid, e] : doc.at("per_question").items()) {
                QuestionOutcome o;
                o.hit = e.at("hit").get<bool>();
                if (!e.at("rank").is_null()) o.rank_of_gold = e.at("rank").get<std::size_t>();
                o.missing = e.at("missing").get<bool>();
                r.per_question.emplace(qid, o);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, 1, std::string("malformed report: ") + e.what());
        }
    } else {
        std::istringstream lines(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line.rfind("#k=", 0) == 0) {
                r.k_used = std::stoul(line.substr(3));
                continue;
            }
            std::istringstream fields(line);
            std::string qid, hit, rank, missing;
            if (!std::getline(fields, qid, '\t') || !std::getline(fields, hit, '\t') ||
                !std::getline(fields, rank, '\t') || !std::getline(fields, missing, '\t')) {
                throw ParseError(source, lineno, "expected 4 tab-separated fields");
            }
            QuestionOutcome o;
            o.hit = hit == "1";
            if (rank != "-") o.rank_of_gold = std::stoul(rank);
            o.missing = missing == "1";
            r.per_question.emplace(qid, o);
        }
        if (r.k_used == 0) throw ParseError(source, 1, "missing #k= header");
    }
    finalize(r);
    return r;
}

EvalReport load_report(const std::string& path) {
    auto in = io::open_input(path);
    return read_report(in, path);
}

void write_comparison_text(const ComparisonTable& table, std::ostream& out) {
    std::size_t width = 3;
    for (const auto& r : table.rows) width = std::max(width, r.name.size());
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s  %25s\n", static_cast<int>(width), "Run",
                  "Gold Retrieval Rate (%)");
    out << buf;
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof(buf), "%-*s  %25s%s\n", static_cast<int>(width), r.name.c_str(),
                      format_percent(r.rate).c_str(), r.best ? "  *best" : "");
        out << buf;
    }
    if (!table.deltas.empty()) {
        out << '\n';
        for (const auto& d : table.deltas) {
            out << d.from << " -> " << d.to << ": " << format_percent(d.delta, true) << '\n';
        }
    }
}

void write_comparison_json(const ComparisonTable& table, std::ostream& out) {
    nlohmann::ordered_json doc;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        nlohmann::ordered_json e;
        e["name"] = r.name;
        e["retrieval_rate"] = r.rate;
        e["retrieval_rate_pct"] = format_percent(r.rate);
        e["hits"] = r.hits;
        e["questions"] = r.questions;
        e["best"] = r.best;
        rows.push_back(std::move(e));
    }
    auto deltas = nlohmann::ordered_json::array();
    for (const auto& d : table.deltas) {
        nlohmann::ordered_json e;
        e["from"] = d.from;
        e["to"] = d.to;
        e["delta"] = d.delta;
        e["delta_pct"] = format_percent(d.delta, true);
        deltas.push_back(std::move(e));
    }
    doc["runs"] = std::move(rows);
    doc["deltas"] = std::move(deltas);
    if (!table.rows.empty()) doc["best"] = table.rows[table.best].name;
    out << doc.dump(1) << '\n';
}

void write_comparison_tsv(const ComparisonTable& table, std::ostream& out) {
    out << "run\tretrieval_rate\tpercent\tbest\n";
    for (const auto& r : table.rows) {
        out << r.name << '\t' << io::format_double(r.rate) << '\t' << format_percent(r.rate) << '\t'
            << (r.best ? 1 : 0) << '\n';
    }
    for (const auto& d : table.deltas) {
        out << "delta:" << d.from << "->" << d.to << '\t' << io::format_double(d.delta) << '\t'
            << format_percent(d.delta, true) << "\t-\n";
    }
}

}  // namespace hopchain
