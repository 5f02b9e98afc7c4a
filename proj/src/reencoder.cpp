#include "hopchain/reencoder.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"
#include "hopchain/random.hpp"

namespace hopchain {

namespace {

struct Activations {
    std::vector<double> x;  // [q; d1]
    std::vector<double> z;  // pre-activation
    std::vector<double> h;  // relu(z)
    std::vector<double> g;  // output
};

void forward(const ReEncoderModel& m, std::span<const double> q, std::span<const double> d1,
             Activations& a) {
    const std::size_t in = 2 * m.dim;
    a.x.resize(in);
    std::copy(q.begin(), q.end(), a.x.begin());
    std::copy(d1.begin(), d1.end(), a.x.begin() + static_cast<std::ptrdiff_t>(m.dim));
    a.z.resize(m.hidden);
    a.h.resize(m.hidden);
    for (std::size_t j = 0; j < m.hidden; ++j) {
        double s = m.b1[j];
        const double* row = m.w1.data() + j * in;
        for (std::size_t k = 0; k < in; ++k) s += row[k] * a.x[k];
        a.z[j] = s;
        a.h[j] = s > 0.0 ? s : 0.0;
    }
    a.g.resize(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) {
        double s = m.b2[i];
        const double* row = m.w2.data() + i * m.hidden;
        for (std::size_t j = 0; j < m.hidden; ++j) s += row[j] * a.h[j];
        a.g[i] = s;
    }
}

void check_triple(const ReEncoderModel& m, const ChainTriple& t) {
    for (const auto* v : {&t.q_qa, &t.d1, &t.d2_target}) {
        if (v->size() != m.dim) throw DimensionError(m.dim, v->size());
    }
}

double triple_loss(const std::vector<double>& g, const Embedding& target, TrainObjective obj) {
    double s = 0.0;
    if (obj == TrainObjective::Mse) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double d = g[i] - target[i];
            s += d * d;
        }
    } else {
        for (std::size_t i = 0; i < g.size(); ++i) s -= g[i] * target[i];
    }
    return s;
}

// Accumulates scale * d(triple loss)/d(params) into grad.
void accumulate_gradient(const ReEncoderModel& m, const ChainTriple& t, TrainObjective obj,
                         double scale, Activations& a, std::vector<double>& delta,
                         std::vector<double>& dz, ReEncoderModel& grad) {
    forward(m, t.q_qa, t.d1, a);
    const std::size_t in = 2 * m.dim;
    delta.resize(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) {
        delta[i] = obj == TrainObjective::Mse ? 2.0 * (a.g[i] - t.d2_target[i]) * scale
                                              : -t.d2_target[i] * scale;
    }
    dz.assign(m.hidden, 0.0);
    for (std::size_t i = 0; i < m.dim; ++i) {
        grad.b2[i] += delta[i];
        double* grow = grad.w2.data() + i * m.hidden;
        const double* wrow = m.w2.data() + i * m.hidden;
        for (std::size_t j = 0; j < m.hidden; ++j) {
            grow[j] += delta[i] * a.h[j];
            dz[j] += wrow[j] * delta[i];
        }
    }
    for (std::size_t j = 0; j < m.hidden; ++j) {
        if (!(a.z[j] > 0.0)) continue;
        grad.b1[j] += dz[j];
        double* grow = grad.w1.data() + j * in;
        for (std::size_t k = 0; k < in; ++k) grow[k] += dz[j] * a.x[k];
    }
}

void sgd_step(ReEncoderModel& m, const ReEncoderModel& grad, double lr) {
    auto step = [lr](std::vector<double>& p, const std::vector<double>& g) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    };
    step(m.w1, grad.w1);
    step(m.b1, grad.b1);
    step(m.w2, grad.w2);
    step(m.b2, grad.b2);
}

void fill_zero(ReEncoderModel& m) {
    for (auto* v : {&m.w1, &m.b1, &m.w2, &m.b2}) std::fill(v->begin(), v->end(), 0.0);
}

std::vector<double>* param_block(ReEncoderModel& m, int block) {
    switch (block) {
        case 0: return &m.w1;
        case 1: return &m.b1;
        case 2: return &m.w2;
        default: return &m.b2;
    }
}

}  // namespace

ReEncoderModel ReEncoderModel::zeros(std::size_t dim, std::size_t hidden) {
    if (dim == 0 || hidden == 0) throw PreconditionError("re-encoder dim and hidden must be positive");
    ReEncoderModel m;
    m.dim = dim;
    m.hidden = hidden;
    m.w1.assign(hidden * 2 * dim, 0.0);
    m.b1.assign(hidden, 0.0);
    m.w2.assign(dim * hidden, 0.0);
    m.b2.assign(dim, 0.0);
    return m;
}

ReEncoderModel ReEncoderModel::initialized(std::size_t dim, std::size_t hidden, std::uint64_t seed) {
    ReEncoderModel m = zeros(dim, hidden);
    Rng rng(seed);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(2 * dim));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& v : m.w1) v = rng.uniform(-r1, r1);
    for (auto& v : m.b1) v = rng.uniform(-r1, r1);
    for (auto& v : m.w2) v = rng.uniform(-r2, r2);
    for (auto& v : m.b2) v = rng.uniform(-r2, r2);
    return m;
}

void ReEncoderModel::validate() const {
    if (dim == 0 || hidden == 0) throw PreconditionError("re-encoder dim and hidden must be positive");
    if (w1.size() != hidden * 2 * dim || b1.size() != hidden || w2.size() != dim * hidden ||
        b2.size() != dim) {
        throw PreconditionError("re-encoder parameter shapes disagree with dim/hidden");
    }
    for (const auto* v : {&w1, &b1, &w2, &b2}) {
        if (!std::all_of(v->begin(), v->end(), [](double x) { return std::isfinite(x); })) {
            throw PreconditionError("re-encoder has a non-finite parameter");
        }
    }
}

Embedding ReEncoderModel::reencode(std::span<const double> q_qa, std::span<const double> d1) const {
    if (q_qa.size() != dim) throw DimensionError(dim, q_qa.size());
    if (d1.size() != dim) throw DimensionError(dim, d1.size());
    Activations a;
    forward(*this, q_qa, d1, a);
    return std::move(a.g);
}

double batch_loss(const ReEncoderModel& model, std::span<const ChainTriple> batch,
                  TrainObjective objective) {
    if (batch.empty()) return 0.0;
    Activations a;
    double total = 0.0;
    for (const auto& t : batch) {
        check_triple(model, t);
        forward(model, t.q_qa, t.d1, a);
        total += triple_loss(a.g, t.d2_target, objective);
    }
    return total / static_cast<double>(batch.size());
}

ReEncoderModel loss_gradient(const ReEncoderModel& model, std::span<const ChainTriple> batch,
                             TrainObjective objective) {
    ReEncoderModel grad = ReEncoderModel::zeros(model.dim, model.hidden);
    if (batch.empty()) return grad;
    Activations a;
    std::vector<double> delta;
    std::vector<double> dz;
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const auto& t : batch) {
        check_triple(model, t);
        accumulate_gradient(model, t, objective, scale, a, delta, dz, grad);
    }
    return grad;
}

TrainResult train(std::span<const ChainTriple> triples, const TrainConfig& config) {
    if (triples.empty()) throw PreconditionError("training needs at least one triple");
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw PreconditionError("learning_rate must be positive");
    }
    if (config.epochs < 1) throw PreconditionError("epochs must be >= 1");
    if (config.batch_size < 1) throw PreconditionError("batch_size must be >= 1");

    const std::size_t dim = triples.front().q_qa.size();
    if (dim == 0) throw PreconditionError("embeddings must be non-empty");
    const std::size_t hidden = config.hidden == 0 ? 4 * dim : config.hidden;

    TrainResult result;
    result.model = ReEncoderModel::initialized(dim, hidden, derive_seed(config.seed, "reencoder.init"));
    ReEncoderModel& model = result.model;
    for (const auto& t : triples) check_triple(model, t);

    Rng order_rng(derive_seed(config.seed, "reencoder.order"));
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);

    ReEncoderModel grad = ReEncoderModel::zeros(dim, hidden);
    Activations a;
    std::vector<double> delta;
    std::vector<double> dz;
    const auto bs = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[order_rng.below(i)]);
        }
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t end = std::min(order.size(), start + bs);
            const double scale = 1.0 / static_cast<double>(end - start);
            fill_zero(grad);
            for (std::size_t i = start; i < end; ++i) {
                accumulate_gradient(model, triples[order[i]], config.objective, scale, a, delta, dz,
                                    grad);
            }
            sgd_step(model, grad, config.learning_rate);
        }
        const double loss = batch_loss(model, triples, config.objective);
        if (!std::isfinite(loss)) throw DivergenceError(epoch);
        result.epoch_loss.push_back(loss);
    }
    return result;
}

double gradient_check(const ReEncoderModel& model, const ChainTriple& triple, double epsilon,
                      TrainObjective objective) {
    if (!(epsilon > 0.0 && epsilon <= 1e-2)) {
        throw PreconditionError("gradient_check epsilon must lie in (0, 1e-2]");
    }
    model.validate();
    check_triple(model, triple);
    const std::span<const ChainTriple> one(&triple, 1);
    ReEncoderModel analytic = loss_gradient(model, one, objective);

    Activations base;
    forward(model, triple.q_qa, triple.d1, base);
    const std::size_t in = 2 * model.dim;

    ReEncoderModel probe = model;
    double worst = 0.0;
    for (int block = 0; block < 4; ++block) {
        std::vector<double>& params = *param_block(probe, block);
        const std::vector<double>& grads = *param_block(analytic, block);
        for (std::size_t p = 0; p < params.size(); ++p) {
            if (block <= 1) {
                const std::size_t unit = block == 0 ? p / in : p;
                const double input = block == 0 ? base.x[p % in] : 1.0;
                const double up = base.z[unit] + epsilon * input;
                const double down = base.z[unit] - epsilon * input;
                if ((up > 0.0) != (down > 0.0)) continue;
            }
            const double saved = params[p];
            params[p] = saved + epsilon;
            const double lp = batch_loss(probe, one, objective);
            params[p] = saved - epsilon;
            const double lm = batch_loss(probe, one, objective);
            params[p] = saved;

            const double numeric = (lp - lm) / (2.0 * epsilon);
            const double a = grads[p];
            if (a == 0.0 && numeric == 0.0) continue;
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

void write_model(const ReEncoderModel& model, std::ostream& out, const std::string& config_digest) {
    nlohmann::ordered_json doc;
    doc["format"] = "hopchain-reencoder";
    doc["version"] = 1;
    if (!config_digest.empty()) doc["config_digest"] = config_digest;
    doc["dim"] = model.dim;
    doc["hidden"] = model.hidden;
    doc["w1"] = model.w1;
    doc["b1"] = model.b1;
    doc["w2"] = model.w2;
    doc["b2"] = model.b2;
    out << doc.dump(1) << '\n';
}

ReEncoderModel read_model(std::istream& in, const std::string& source) {
    ReEncoderModel m;
    try {
        auto doc = nlohmann::json::parse(in);
        if (doc.value("format", "") != "hopchain-reencoder" || doc.value("version", 0) != 1) {
            throw FormatError(source, 1, "not a hopchain-reencoder v1 document");
        }
        m.dim = doc.at("dim").get<std::size_t>();
        m.hidden = doc.at("hidden").get<std::size_t>();
        m.w1 = doc.at("w1").get<std::vector<double>>();
        m.b1 = doc.at("b1").get<std::vector<double>>();
        m.w2 = doc.at("w2").get<std::vector<double>>();
        m.b2 = doc.at("b2").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(source, 1, std::string("malformed re-encoder model: ") + e.what());
    }
    try {
        m.validate();
    } catch (const PreconditionError& e) {
        throw FormatError(source, 1, e.what());
    }
    return m;
}

void save_model(const ReEncoderModel& model, const std::string& path, const std::string& config_digest) {
    io::write_atomic(path, [&](std::ostream& out) { write_model(model, out, config_digest); });
}

ReEncoderModel load_model(const std::string& path) {
    auto in = io::open_input(path);
    return read_model(in, path);
}

}  // namespace hopchain
