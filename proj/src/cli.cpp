#include "hopchain/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "hopchain/chain_builder.hpp"
#include "hopchain/config.hpp"
#include "hopchain/corpus.hpp"
#include "hopchain/dense_index.hpp"
#include "hopchain/error.hpp"
#include "hopchain/eval.hpp"
#include "hopchain/io.hpp"
#include "hopchain/kernels.hpp"
#include "hopchain/lexical_index.hpp"
#include "hopchain/pipeline.hpp"
#include "hopchain/reencoder.hpp"
#include "hopchain/reranker.hpp"

namespace hopchain::cli {

namespace {

struct CommonOptions {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config,
                    std::string("Config file (JSON); defaults to $") + kConfigEnv);
    cmd->add_option("--preset", o.preset, "Pipeline preset: eqasc_baseline, expanded, semantic, hybrid");
    cmd->add_option("--seed", o.seed, "Run seed; every stochastic stage derives from it");
}

EngineConfig resolve_config(const CommonOptions& o) {
    EngineConfig c;
    std::string path = o.config;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnv); env != nullptr) path = env;
    }
    if (!path.empty()) {
        try {
            c = load_config(path);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
    }
    if (!o.preset.empty()) c.pipeline = preset(o.preset).pipeline;
    if (o.seed) c.seed = *o.seed;
    return c;
}

void check(const EngineConfig& c) {
    auto violations = validate(c);
    if (violations.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& v : violations) msg += " " + v.field + " (" + v.bound + ")";
    throw ConfigError(msg);
}

std::string require_path(const std::string& flag_value, const std::optional<std::string>& from_config,
                         const char* flag) {
    if (!flag_value.empty()) return flag_value;
    if (from_config) return *from_config;
    throw ConfigError(std::string("missing required input ") + flag);
}

Tokenizer make_tokenizer(const EngineConfig& c) {
    if (c.paths.stopwords) return Tokenizer(load_stopwords(*c.paths.stopwords), c.stem);
    return Tokenizer(default_stopwords(), c.stem);
}

std::vector<QAPair> qa_pairs(const std::vector<QuestionRecord>& recs) {
    std::vector<QAPair> out;
    out.reserve(recs.size());
    for (const auto& r : recs) out.push_back(r.qa);
    return out;
}

int category_exit(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config: return kConfig;
        case ErrorKind::Io:
        case ErrorKind::Parse:
        case ErrorKind::Format:
        case ErrorKind::DuplicateId: return kIo;
        default: return kFailure;
    }
}

void error_line(std::ostream& err, const std::string& category, std::string msg) {
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "hopchain: error[" << category << "]: " << msg << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"hopchain: two-hop explanation chain retrieval", "hopchain"};
    app.require_subcommand(1, 1);
    app.failure_message(CLI::FailureMessage::simple);

    std::function<void()> action;

    // build-index
    CommonOptions bi_common;
    std::string bi_corpus, bi_out, bi_stopwords;
    bool bi_stem = false;
    std::optional<double> bi_k1, bi_b;
    auto* bi = app.add_subcommand("build-index", "Build and save a BM25 index snapshot");
    add_common(bi, bi_common);
    bi->add_option("--corpus", bi_corpus, "Corpus file (JSON Lines id/text)");
    bi->add_option("--out", bi_out, "Index snapshot to write");
    bi->add_option("--stopwords", bi_stopwords, "Stopword list, one per line");
    bi->add_flag("--stem", bi_stem, "Fold plural suffixes");
    bi->add_option("--k1", bi_k1, "BM25 k1");
    bi->add_option("--b", bi_b, "BM25 b");
    bi->callback([&] {
        action = [&] {
            EngineConfig c = resolve_config(bi_common);
            if (!bi_stopwords.empty()) c.paths.stopwords = bi_stopwords;
            if (bi_stem) c.stem = true;
            if (bi_k1) c.bm25.k1 = *bi_k1;
            if (bi_b) c.bm25.b = *bi_b;
            check(c);
            const auto corpus = load_corpus(require_path(bi_corpus, c.paths.corpus, "--corpus"));
            const auto out_path = require_path(bi_out, c.paths.index, "--out");
            const auto index = InvertedIndex::build(corpus, c.bm25, make_tokenizer(c));
            index.save(out_path);
            out << "indexed " << index.doc_count() << " facts, " << index.vocabulary_size()
                << " terms -> " << out_path << '\n';
        };
    });

    // import-embeddings
    CommonOptions ie_common;
    std::string ie_in, ie_out, ie_corpus;
    std::optional<std::size_t> ie_dim;
    auto* ie = app.add_subcommand("import-embeddings", "Validate an embeddings file and write it canonically");
    add_common(ie, ie_common);
    ie->add_option("--in", ie_in, "Embeddings file (#dim=<d> header)")->required();
    ie->add_option("--out", ie_out, "Canonical embeddings file to write")->required();
    ie->add_option("--corpus", ie_corpus, "Require every id to be a fact of this corpus");
    ie->add_option("--dim", ie_dim, "Require this dimension");
    ie->callback([&] {
        action = [&] {
            check(resolve_config(ie_common));
            const auto emb = load_embeddings(ie_in);
            if (ie_dim && *ie_dim != emb.dim()) {
                throw FormatError(ie_in, 1, "dimension " + std::to_string(emb.dim()) + ", expected " +
                                                std::to_string(*ie_dim));
            }
            if (!ie_corpus.empty()) {
                const auto corpus = load_corpus(ie_corpus);
                std::size_t unknown = 0;
                std::string first;
                for (const auto& id : emb.ids()) {
                    if (corpus.find(id) == nullptr && unknown++ == 0) first = id;
                }
                if (unknown > 0) {
                    throw FormatError(ie_in, 0, std::to_string(unknown) + " ids are not corpus facts (first: \"" +
                                                    first + "\")");
                }
            }
            emb.save(ie_out);
            out << "imported " << emb.size() << " embeddings, dim " << emb.dim() << " -> " << ie_out << '\n';
        };
    });

    // train-reencoder
    CommonOptions tr_common;
    std::string tr_facts, tr_queries, tr_questions, tr_out, tr_loss_out, tr_objective;
    std::optional<int> tr_epochs, tr_batch;
    std::optional<double> tr_lr;
    std::optional<std::size_t> tr_hidden;
    bool tr_both = false;
    auto* tr = app.add_subcommand("train-reencoder", "Train the second-hop query re-encoder on gold chains");
    add_common(tr, tr_common);
    tr->add_option("--fact-embeddings", tr_facts, "Fact embeddings file");
    tr->add_option("--query-embeddings", tr_queries, "Query embeddings file keyed by qid");
    tr->add_option("--questions", tr_questions, "Questions file with gold fact1/fact2");
    tr->add_option("--out", tr_out, "Model file to write");
    tr->add_option("--loss-out", tr_loss_out, "Per-epoch training loss (TSV)");
    tr->add_option("--epochs", tr_epochs, "Training epochs");
    tr->add_option("--learning-rate", tr_lr, "Gradient descent step size");
    tr->add_option("--batch-size", tr_batch, "Mini-batch size");
    tr->add_option("--hidden", tr_hidden, "Hidden width (0 = 4 * dim)");
    tr->add_option("--objective", tr_objective, "mse or inner_product")
        ->check(CLI::IsMember({"mse", "inner_product"}));
    tr->add_flag("--both-orientations", tr_both, "Also train on reversed gold chains");
    tr->callback([&] {
        action = [&] {
            EngineConfig c = resolve_config(tr_common);
            if (tr_epochs) c.train.epochs = *tr_epochs;
            if (tr_lr) c.train.learning_rate = *tr_lr;
            if (tr_batch) c.train.batch_size = *tr_batch;
            if (tr_hidden) c.train.hidden = *tr_hidden;
            if (!tr_objective.empty()) {
                c.train.objective = tr_objective == "mse" ? TrainObjective::Mse : TrainObjective::InnerProduct;
            }
            check(c);
            const auto facts = load_embeddings(require_path(tr_facts, c.paths.fact_embeddings, "--fact-embeddings"));
            const auto queries =
                load_embeddings(require_path(tr_queries, c.paths.query_embeddings, "--query-embeddings"));
            const auto records = load_questions(require_path(tr_questions, c.paths.questions, "--questions"));
            const auto out_path = require_path(tr_out, c.paths.reencoder, "--out");
            if (facts.dim() != queries.dim()) throw DimensionError(facts.dim(), queries.dim());

            std::vector<ChainTriple> triples;
            for (const auto& g : gold_chains(records)) {
                auto q = queries.at(g.qid);
                auto a = facts.at(g.f1);
                auto b = facts.at(g.f2);
                triples.push_back({{q.begin(), q.end()}, {a.begin(), a.end()}, {b.begin(), b.end()}});
                if (tr_both) triples.push_back({{q.begin(), q.end()}, {b.begin(), b.end()}, {a.begin(), a.end()}});
            }
            const auto result = train(triples, c.train_config());
            save_model(result.model, out_path, config_digest(c));
            if (!tr_loss_out.empty()) {
                io::write_atomic(tr_loss_out, [&](std::ostream& o) {
                    o << "epoch\tloss\n";
                    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
                        o << e + 1 << '\t' << io::format_double(result.epoch_loss[e]) << '\n';
                    }
                });
            }
            out << "trained on " << triples.size() << " triples, " << result.epoch_loss.size()
                << " epochs, final loss " << io::format_double(result.epoch_loss.back()) << " -> "
                << out_path << '\n';
        };
    });

    // generate
    CommonOptions gen_common;
    std::string gen_mode = "syntactic", gen_corpus, gen_questions, gen_out, gen_index, gen_facts,
                gen_queries, gen_model;
    int gen_threads = 1;
    std::optional<std::size_t> gen_n, gen_m, gen_k;
    std::optional<double> gen_merge;
    auto* gen = app.add_subcommand("generate", "Generate ranked two-hop chains for every question");
    add_common(gen, gen_common);
    gen->add_option("--mode", gen_mode, "syntactic, semantic or hybrid")
        ->check(CLI::IsMember({"syntactic", "semantic", "hybrid"}));
    gen->add_option("--corpus", gen_corpus, "Corpus file");
    gen->add_option("--questions", gen_questions, "Questions file");
    gen->add_option("--out", gen_out, "Chains file to write");
    gen->add_option("--index", gen_index, "Index snapshot (built from the corpus when absent)");
    gen->add_option("--fact-embeddings", gen_facts, "Fact embeddings (semantic, hybrid)");
    gen->add_option("--query-embeddings", gen_queries, "Query embeddings keyed by qid (semantic, hybrid)");
    gen->add_option("--reencoder", gen_model, "Trained re-encoder model (semantic, hybrid)");
    gen->add_option("--threads", gen_threads, "Questions processed in parallel")->check(CLI::PositiveNumber);
    gen->add_option("--n-first", gen_n, "Override N (syntactic hop-1 facts)");
    gen->add_option("--m-second", gen_m, "Override M (syntactic hop-2 facts per hop-1 fact)");
    gen->add_option("--k-chains", gen_k, "Override K (chains kept)");
    gen->add_option("--merge-fraction", gen_merge, "Override the hybrid merge fraction");
    gen->callback([&] {
        action = [&] {
            EngineConfig c = resolve_config(gen_common);
            if (gen_n) c.pipeline.n_first = *gen_n;
            if (gen_m) c.pipeline.m_second = *gen_m;
            if (gen_k) c.pipeline.k_chains = *gen_k;
            if (gen_merge) c.pipeline.merge_fraction = *gen_merge;
            if (!gen_facts.empty()) c.paths.fact_embeddings = gen_facts;
            if (!gen_queries.empty()) c.paths.query_embeddings = gen_queries;
            if (!gen_model.empty()) c.paths.reencoder = gen_model;
            if (!gen_index.empty()) c.paths.index = gen_index;
            check(c);
            const GenerateMode mode = generate_mode_from_string(gen_mode);
            const bool dense = mode != GenerateMode::Syntactic;
            if (dense && (!c.paths.fact_embeddings || !c.paths.query_embeddings || !c.paths.reencoder)) {
                throw ConfigError(std::string("--mode ") + gen_mode +
                                  " needs --fact-embeddings, --query-embeddings and --reencoder");
            }
            const auto corpus = load_corpus(require_path(gen_corpus, c.paths.corpus, "--corpus"));
            const auto records = load_questions(require_path(gen_questions, c.paths.questions, "--questions"));
            const auto out_path = require_path(gen_out, c.paths.output, "--out");

            std::optional<InvertedIndex> lexical;
            if (c.paths.index) {
                lexical = InvertedIndex::load(*c.paths.index);
            } else {
                lexical = InvertedIndex::build(corpus, c.bm25, make_tokenizer(c));
            }
            std::optional<DenseIndex> facts, queries;
            std::optional<ReEncoderModel> model;
            GenerateInputs inputs{corpus, &*lexical, std::nullopt, &lexical->tokenizer()};
            if (dense) {
                facts = load_embeddings(*c.paths.fact_embeddings);
                queries = load_embeddings(*c.paths.query_embeddings);
                model = load_model(*c.paths.reencoder);
                inputs.dense.emplace(DenseResources{*facts, *queries, *model});
            }
            const auto qas = qa_pairs(records);
            const auto chains = generate(qas, mode, c.pipeline, inputs, gen_threads);
            save_chains(chains, out_path, config_digest(c));
            std::size_t total = 0;
            for (const auto& q : chains) total += q.chains.size();
            out << "generated " << total << " chains for " << chains.size() << " questions (" << gen_mode
                << ") -> " << out_path << '\n';
        };
    });

    // rerank
    CommonOptions rr_common;
    std::string rr_chains, rr_scores, rr_out;
    std::optional<std::size_t> rr_k;
    auto* rr = app.add_subcommand("rerank", "Re-rank chains by a score file (or retrieval sums) and keep top-k");
    add_common(rr, rr_common);
    rr->add_option("--chains", rr_chains, "Chains file")->required();
    rr->add_option("--scores", rr_scores, "Score file; retrieval-sum baseline when absent");
    rr->add_option("--k", rr_k, "Chains kept per question");
    rr->add_option("--out", rr_out, "Chains file to write")->required();
    rr->callback([&] {
        action = [&] {
            EngineConfig c = resolve_config(rr_common);
            if (rr_k) c.rerank_k = *rr_k;
            if (!rr_scores.empty()) c.paths.scores = rr_scores;
            check(c);
            auto chains = load_chains(rr_chains);
            std::optional<ScoreTable> table;
            if (c.paths.scores) table = load_scores(*c.paths.scores);
            for (auto& q : chains) {
                const ScoreTable scores = table ? *table : baseline_scores(q.qid, q.chains);
                q.chains = rerank(q.chains, scores, q.qid, c.rerank_k);
            }
            save_chains(chains, rr_out, config_digest(c));
            out << "re-ranked " << chains.size() << " questions to top-" << c.rerank_k << " ("
                << (table ? "score file" : "retrieval-sum baseline") << ") -> " << rr_out << '\n';
        };
    });

    // build-rerank-dataset
    CommonOptions ds_common;
    std::string ds_chains, ds_questions, ds_corpus, ds_out;
    std::optional<std::size_t> ds_npp;
    auto* ds = app.add_subcommand("build-rerank-dataset", "Export labeled chains for classifier training");
    add_common(ds, ds_common);
    ds->add_option("--chains", ds_chains, "Candidate pool (chains file)")->required();
    ds->add_option("--questions", ds_questions, "Questions file with gold chains");
    ds->add_option("--corpus", ds_corpus, "Corpus file");
    ds->add_option("--out", ds_out, "Dataset file to write (JSON Lines)")->required();
    ds->add_option("--negatives-per-positive", ds_npp, "Invalid chains sampled per valid chain");
    ds->callback([&] {
        action = [&] {
            EngineConfig c = resolve_config(ds_common);
            if (ds_npp) c.negatives_per_positive = *ds_npp;
            check(c);
            const auto corpus = load_corpus(require_path(ds_corpus, c.paths.corpus, "--corpus"));
            const auto records = load_questions(require_path(ds_questions, c.paths.questions, "--questions"));
            std::unordered_map<std::string, std::vector<ChainCandidate>> pools;
            for (auto& q : load_chains(ds_chains)) pools.emplace(q.qid, std::move(q.chains));
            const auto gold = gold_chains(records);
            const auto qas = qa_pairs(records);
            const auto dataset = build_rerank_dataset(gold, qas, pools, corpus, c.negatives_per_positive,
                                                      c.stage_seed("rerank-dataset"));
            const auto digest = config_digest(c);
            io::write_atomic(ds_out, [&](std::ostream& o) { write_rerank_dataset(dataset.records, o, digest); });
            if (dataset.short_pools > 0) {
                err << "hopchain: warning: " << dataset.short_pools << " questions had too few candidates ("
                    << dataset.missing_negatives << " negatives missing)\n";
            }
            out << "wrote " << dataset.records.size() << " records for " << gold.size() << " questions -> "
                << ds_out << '\n';
        };
    });

    // eval
    CommonOptions ev_common;
    std::string ev_chains, ev_questions, ev_out, ev_format = "json";
    std::size_t ev_k = 10;
    auto* ev = app.add_subcommand("eval", "Gold retrieval rate of a chains file");
    add_common(ev, ev_common);
    ev->add_option("--chains", ev_chains, "Chains file")->required();
    ev->add_option("--questions", ev_questions, "Questions file with gold chains");
    ev->add_option("--k", ev_k, "Top-k chains inspected per question")->check(CLI::PositiveNumber);
    ev->add_option("--out", ev_out, "Report file to write");
    ev->add_option("--format", ev_format, "Report file format: json or tsv")->check(CLI::IsMember({"json", "tsv"}));
    ev->callback([&] {
        action = [&] {
            EngineConfig c = resolve_config(ev_common);
            check(c);
            const auto chains = load_chains(ev_chains);
            const auto records = load_questions(require_path(ev_questions, c.paths.questions, "--questions"));
            const auto report = gold_retrieval_rate(chains, gold_chains(records), ev_k);
            if (!ev_out.empty()) {
                const auto digest = config_digest(c);
                io::write_atomic(ev_out, [&](std::ostream& o) {
                    if (ev_format == "tsv") {
                        write_report_tsv(report, o);
                    } else {
                        write_report_json(report, o, digest);
                    }
                });
            }
            out << "gold retrieval rate @" << ev_k << ": " << format_percent(report.retrieval_rate) << "% ("
                << report.hits << "/" << report.questions() << ")";
            if (report.missing() > 0) out << ", " << report.missing() << " questions without predictions";
            out << '\n';
        };
    });

    // report
    CommonOptions rp_common;
    std::vector<std::string> rp_runs;
    std::string rp_format = "text", rp_out;
    auto* rp = app.add_subcommand("report", "Compare eval reports side by side");
    add_common(rp, rp_common);
    rp->add_option("--run", rp_runs, "name=report-file, repeatable, in table order")->required();
    rp->add_option("--format", rp_format, "text, json or tsv")->check(CLI::IsMember({"text", "json", "tsv"}));
    rp->add_option("--out", rp_out, "Write the table here instead of stdout");
    rp->callback([&] {
        action = [&] {
            check(resolve_config(rp_common));
            std::vector<NamedReport> reports;
            for (const auto& spec : rp_runs) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
                    throw ConfigError("--run expects name=path, got \"" + spec + "\"");
                }
                reports.push_back({spec.substr(0, eq), load_report(spec.substr(eq + 1))});
            }
            const auto table = compare_runs(reports);
            auto emit = [&](std::ostream& o) {
                if (rp_format == "json") {
                    write_comparison_json(table, o);
                } else if (rp_format == "tsv") {
                    write_comparison_tsv(table, o);
                } else {
                    write_comparison_text(table, o);
                }
            };
            if (rp_out.empty()) {
                emit(out);
            } else {
                io::write_atomic(rp_out, emit);
            }
        };
    });

    std::vector<const char*> argv;
    argv.push_back("hopchain");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        error_line(err, "usage", e.what());
        return kUsage;
    }

    try {
        action();
    } catch (const Error& e) {
        error_line(err, to_string(e.kind()), e.what());
        return category_exit(e.kind());
    } catch (const std::exception& e) {
        error_line(err, "internal", e.what());
        return kFailure;
    }
    return kOk;
}

}  // namespace hopchain::cli
