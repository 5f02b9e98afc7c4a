#include "hopchain/config.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"
#include "hopchain/random.hpp"

namespace hopchain {

using ojson = nlohmann::ordered_json;

namespace {

const char* objective_name(TrainObjective o) {
    return o == TrainObjective::Mse ? "mse" : "inner_product";
}

TrainObjective objective_from(const std::string& s) {
    if (s == "mse") return TrainObjective::Mse;
    if (s == "inner_product") return TrainObjective::InnerProduct;
    throw ConfigError("unknown re-encoder objective \"" + s + "\" (mse, inner_product)");
}

ojson path_json(const std::optional<std::string>& p) { return p ? ojson(*p) : ojson(); }

ojson algorithm_json(const EngineConfig& c) {
    ojson j;
    j["tokenizer"] = {{"stem", c.stem}};
    j["bm25"] = {{"k1", c.bm25.k1}, {"b", c.bm25.b}};
    j["pipeline"] = {{"n_first", c.pipeline.n_first},
                     {"m_second", c.pipeline.m_second},
                     {"k_chains", c.pipeline.k_chains},
                     {"semantic_n", c.pipeline.semantic_n},
                     {"semantic_m", c.pipeline.semantic_m},
                     {"merge_fraction", c.pipeline.merge_fraction}};
    j["reencoder"] = {{"learning_rate", c.train.learning_rate},
                      {"epochs", c.train.epochs},
                      {"batch_size", c.train.batch_size},
                      {"hidden", c.train.hidden},
                      {"objective", objective_name(c.train.objective)}};
    j["rerank"] = {{"k", c.rerank_k}, {"negatives_per_positive", c.negatives_per_positive}};
    j["seed"] = c.seed;
    return j;
}

template <typename T>
void take(const nlohmann::json& obj, const char* key, T& dst) {
    if (auto it = obj.find(key); it != obj.end()) dst = it->get<T>();
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw ConfigError("unknown config key \"" + where + "." + k + "\"");
    }
}

}  // namespace

TrainConfig EngineConfig::train_config() const {
    TrainConfig t = train;
    t.seed = stage_seed("reencoder");
    return t;
}

std::uint64_t EngineConfig::stage_seed(std::string_view stage) const {
    return derive_seed(seed, stage);
}

std::vector<ConfigViolation> validate(const EngineConfig& c) {
    std::vector<ConfigViolation> v;
    auto need = [&](bool ok, const char* field, const char* bound) {
        if (!ok) v.push_back({field, bound});
    };
    need(c.bm25.k1 >= 0.0 && std::isfinite(c.bm25.k1), "bm25.k1", ">= 0");
    need(c.bm25.b >= 0.0 && c.bm25.b <= 1.0, "bm25.b", "in [0, 1]");
    need(c.pipeline.n_first >= 1, "pipeline.n_first", ">= 1");
    need(c.pipeline.m_second >= 1, "pipeline.m_second", ">= 1");
    need(c.pipeline.k_chains >= 1, "pipeline.k_chains", ">= 1");
    need(c.pipeline.semantic_n >= 1, "pipeline.semantic_n", ">= 1");
    need(c.pipeline.semantic_m >= 1, "pipeline.semantic_m", ">= 1");
    need(c.pipeline.merge_fraction >= 0.0 && c.pipeline.merge_fraction <= 1.0,
         "pipeline.merge_fraction", "in [0, 1]");
    need(c.train.learning_rate > 0.0 && std::isfinite(c.train.learning_rate),
         "reencoder.learning_rate", "> 0");
    need(c.train.epochs >= 1, "reencoder.epochs", ">= 1");
    need(c.train.batch_size >= 1, "reencoder.batch_size", ">= 1");
    need(c.rerank_k >= 1, "rerank.k", ">= 1");
    need(c.negatives_per_positive >= 1, "rerank.negatives_per_positive", ">= 1");
    const std::pair<const char*, const std::optional<std::string>*> paths[] = {
        {"paths.corpus", &c.paths.corpus},
        {"paths.questions", &c.paths.questions},
        {"paths.stopwords", &c.paths.stopwords},
        {"paths.index", &c.paths.index},
        {"paths.fact_embeddings", &c.paths.fact_embeddings},
        {"paths.query_embeddings", &c.paths.query_embeddings},
        {"paths.reencoder", &c.paths.reencoder},
        {"paths.scores", &c.paths.scores},
        {"paths.output", &c.paths.output},
    };
    for (const auto& [name, p] : paths) need(!p->has_value() || !(*p)->empty(), name, "non-empty when set");
    return v;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"eqasc_baseline", "expanded", "semantic", "hybrid"};
    return names;
}

EngineConfig preset(std::string_view name) {
    EngineConfig c;
    if (name == "eqasc_baseline") {
        c.pipeline.n_first = 20;
        c.pipeline.m_second = 4;
        c.pipeline.k_chains = 10;
    } else if (name == "expanded" || name == "hybrid") {
        c.pipeline.n_first = 200;
        c.pipeline.m_second = 200;
        c.pipeline.k_chains = 200;
        c.pipeline.merge_fraction = 0.25;
    } else if (name == "semantic") {
        c.pipeline.semantic_n = 5;
        c.pipeline.semantic_m = 2;
        c.pipeline.k_chains = 10;
    } else {
        std::string msg = "unknown preset \"" + std::string(name) + "\"; valid presets:";
        for (const auto& n : preset_names()) msg += " " + n;
        throw ConfigError(msg);
    }
    return c;
}

void write_config(const EngineConfig& c, std::ostream& out) {
    ojson j = algorithm_json(c);
    j["paths"] = {{"corpus", path_json(c.paths.corpus)},
                  {"questions", path_json(c.paths.questions)},
                  {"stopwords", path_json(c.paths.stopwords)},
                  {"index", path_json(c.paths.index)},
                  {"fact_embeddings", path_json(c.paths.fact_embeddings)},
                  {"query_embeddings", path_json(c.paths.query_embeddings)},
                  {"reencoder", path_json(c.paths.reencoder)},
                  {"scores", path_json(c.paths.scores)},
                  {"output", path_json(c.paths.output)}};
    out << j.dump(2) << '\n';
}

EngineConfig read_config(std::istream& in, const std::string& source) {
    EngineConfig c;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(source + ": invalid JSON: " + e.what());
    }
    try {
        reject_unknown(j, {"tokenizer", "bm25", "pipeline", "reencoder", "rerank", "seed", "paths"}, "config");
        if (auto it = j.find("tokenizer"); it != j.end()) {
            reject_unknown(*it, {"stem"}, "tokenizer");
            take(*it, "stem", c.stem);
        }
        if (auto it = j.find("bm25"); it != j.end()) {
            reject_unknown(*it, {"k1", "b"}, "bm25");
            take(*it, "k1", c.bm25.k1);
            take(*it, "b", c.bm25.b);
        }
        if (auto it = j.find("pipeline"); it != j.end()) {
            reject_unknown(*it, {"n_first", "m_second", "k_chains", "semantic_n", "semantic_m", "merge_fraction"},
                           "pipeline");
            take(*it, "n_first", c.pipeline.n_first);
            take(*it, "m_second", c.pipeline.m_second);
            take(*it, "k_chains", c.pipeline.k_chains);
            take(*it, "semantic_n", c.pipeline.semantic_n);
            take(*it, "semantic_m", c.pipeline.semantic_m);
            take(*it, "merge_fraction", c.pipeline.merge_fraction);
        }
        if (auto it = j.find("reencoder"); it != j.end()) {
            reject_unknown(*it, {"learning_rate", "epochs", "batch_size", "hidden", "objective"}, "reencoder");
            take(*it, "learning_rate", c.train.learning_rate);
            take(*it, "epochs", c.train.epochs);
            take(*it, "batch_size", c.train.batch_size);
            take(*it, "hidden", c.train.hidden);
            if (auto o = it->find("objective"); o != it->end()) c.train.objective = objective_from(o->get<std::string>());
        }
        if (auto it = j.find("rerank"); it != j.end()) {
            reject_unknown(*it, {"k", "negatives_per_positive"}, "rerank");
            take(*it, "k", c.rerank_k);
            take(*it, "negatives_per_positive", c.negatives_per_positive);
        }
        take(j, "seed", c.seed);
        if (auto it = j.find("paths"); it != j.end()) {
            reject_unknown(*it, {"corpus", "questions", "stopwords", "index", "fact_embeddings",
                                 "query_embeddings", "reencoder", "scores", "output"},
                           "paths");
            auto path = [&](const char* key, std::optional<std::string>& dst) {
                if (auto p = it->find(key); p != it->end() && !p->is_null()) dst = p->get<std::string>();
            };
            path("corpus", c.paths.corpus);
            path("questions", c.paths.questions);
            path("stopwords", c.paths.stopwords);
            path("index", c.paths.index);
            path("fact_embeddings", c.paths.fact_embeddings);
            path("query_embeddings", c.paths.query_embeddings);
            path("reencoder", c.paths.reencoder);
            path("scores", c.paths.scores);
            path("output", c.paths.output);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return c;
}

EngineConfig load_config(const std::string& path) {
    auto in = io::open_input(path);
    return read_config(in, path);
}

void save_config(const EngineConfig& config, const std::string& path) {
    io::write_atomic(path, [&](std::ostream& out) { write_config(config, out); });
}

std::string config_digest(const EngineConfig& config) {
    return io::hex64(io::fnv1a64(algorithm_json(config).dump()));
}

}  // namespace hopchain
