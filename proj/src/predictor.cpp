#include "collage/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "collage/errors.hpp"
#include "collage/rng.hpp"

namespace collage {

namespace {

double logistic(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

Eigen::MatrixXd dense_adjacency(const AdjacencyMatrix& adj) {
    int k = adj.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
    for (int p = 0; p < k; ++p)
        for (int q = 0; q < k; ++q) a(p, q) = adj.at(p, q);
    return a;
}

// D^(-1/2) (A + I) D^(-1/2) on the current node set.
Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& a) {
    int n = static_cast<int>(a.rows());
    Eigen::MatrixXd with_loops = a + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd inv_sqrt_deg = with_loops.rowwise().sum().array().inverse().sqrt();
    return inv_sqrt_deg.asDiagonal() * with_loops * inv_sqrt_deg.asDiagonal();
}

struct LevelCache {
    Eigen::MatrixXd a_hat;   // n_in x n_in
    Eigen::MatrixXd ax;      // a_hat * x_in
    Eigen::MatrixXd z;       // pre-activation, n_in x hidden
    Eigen::MatrixXd h;       // relu(z)
    Eigen::VectorXd w_hat;   // normalized pool vector
    double w_norm = 0.0;
    Eigen::VectorXd score;   // n_in
    Eigen::VectorXd gate;    // tanh(score)
    std::vector<int> kept;   // surviving rows, selection order
    Eigen::MatrixXd pooled;  // k x hidden, gated survivor rows
    std::vector<int> max_row;  // per column: pooled row holding the max
};

struct ForwardCache {
    std::vector<LevelCache> levels;
    Eigen::VectorXd readout;               // 2*hidden, summed over levels
    std::vector<Eigen::VectorXd> mlp_in;   // input of each MLP layer
    std::vector<Eigen::VectorXd> mlp_pre;  // pre-activation of each MLP layer
    double yhat = 0.0;
};

int pooled_count(double ratio, int n) {
    return std::max(1, static_cast<int>(std::ceil(ratio * n)));
}

double forward_cached(const PredictorParams& params, const CollageGraph& graph,
                      ForwardCache& cache) {
    const PredictorConfig& cfg = params.config;
    if (graph.feats.cols() != cfg.feat_dim)
        throw ShapeError("graph feature dim " + std::to_string(graph.feats.cols()) +
                         " does not match predictor feat_dim " + std::to_string(cfg.feat_dim));
    if (graph.adj.size() != graph.feats.rows())
        throw ShapeError("adjacency size does not match feature row count");

    Eigen::MatrixXd x = graph.feats;
    Eigen::MatrixXd a = dense_adjacency(graph.adj);
    std::vector<int> ids = graph.node_ids;
    if (ids.empty()) {
        ids.resize(static_cast<size_t>(x.rows()));
        std::iota(ids.begin(), ids.end(), 0);
    }

    cache.levels.clear();
    cache.levels.resize(static_cast<size_t>(cfg.conv_layers));
    cache.readout = Eigen::VectorXd::Zero(cfg.readout_dim());

    for (int l = 0; l < cfg.conv_layers; ++l) {
        LevelCache& lc = cache.levels[static_cast<size_t>(l)];
        int n_in = static_cast<int>(x.rows());

        lc.a_hat = normalize_adjacency(a);
        lc.ax = lc.a_hat * x;
        lc.z = lc.ax * params.conv_w[static_cast<size_t>(l)];
        lc.z.rowwise() += params.conv_b[static_cast<size_t>(l)].transpose();
        lc.h = lc.z.cwiseMax(0.0);

        lc.w_norm = params.pool_w[static_cast<size_t>(l)].norm();
        lc.w_hat = lc.w_norm > 1e-12
                       ? Eigen::VectorXd(params.pool_w[static_cast<size_t>(l)] / lc.w_norm)
                       : Eigen::VectorXd::Zero(cfg.hidden_dim);
        lc.score = lc.h * lc.w_hat;
        lc.gate = lc.score.array().tanh();

        // Order-independent top-k: score descending, then node id ascending.
        std::vector<int> order(static_cast<size_t>(n_in));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int p, int q) {
            if (lc.score(p) != lc.score(q)) return lc.score(p) > lc.score(q);
            return ids[static_cast<size_t>(p)] < ids[static_cast<size_t>(q)];
        });
        int k = pooled_count(cfg.pool_ratio, n_in);
        lc.kept.assign(order.begin(), order.begin() + k);

        lc.pooled.resize(k, cfg.hidden_dim);
        for (int i = 0; i < k; ++i)
            lc.pooled.row(i) = lc.h.row(lc.kept[static_cast<size_t>(i)]) *
                               lc.gate(lc.kept[static_cast<size_t>(i)]);

        // Readout: [mean | max] over survivors, summed across levels.
        Eigen::VectorXd mean = lc.pooled.colwise().mean();
        lc.max_row.resize(static_cast<size_t>(cfg.hidden_dim));
        Eigen::VectorXd max(cfg.hidden_dim);
        for (int c = 0; c < cfg.hidden_dim; ++c) {
            int best = 0;
            for (int i = 1; i < k; ++i)
                if (lc.pooled(i, c) > lc.pooled(best, c)) best = i;
            lc.max_row[static_cast<size_t>(c)] = best;
            max(c) = lc.pooled(best, c);
        }
        cache.readout.segment(0, cfg.hidden_dim) += mean;
        cache.readout.segment(cfg.hidden_dim, cfg.hidden_dim) += max;

        // Induce the pooled subgraph for the next level.
        Eigen::MatrixXd a_next(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                a_next(i, j) = a(lc.kept[static_cast<size_t>(i)], lc.kept[static_cast<size_t>(j)]);
        std::vector<int> ids_next(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i)
            ids_next[static_cast<size_t>(i)] = ids[static_cast<size_t>(lc.kept[static_cast<size_t>(i)])];
        a = std::move(a_next);
        x = lc.pooled;
        ids = std::move(ids_next);
    }

    size_t mlp_layers = params.mlp_w.size();
    cache.mlp_in.resize(mlp_layers);
    cache.mlp_pre.resize(mlp_layers);
    Eigen::VectorXd u = cache.readout;
    for (size_t j = 0; j < mlp_layers; ++j) {
        cache.mlp_in[j] = u;
        cache.mlp_pre[j] = params.mlp_w[j] * u + params.mlp_b[j];
        u = (j + 1 < mlp_layers) ? cache.mlp_pre[j].cwiseMax(0.0) : cache.mlp_pre[j];
    }
    cache.yhat = logistic(u(0));
    return cache.yhat;
}

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(yhat).
void backward(const PredictorParams& params, const ForwardCache& cache, double dyhat,
              PredictorParams& grad) {
    const PredictorConfig& cfg = params.config;
    size_t mlp_layers = params.mlp_w.size();

    double dz_out = dyhat * cache.yhat * (1.0 - cache.yhat);
    Eigen::VectorXd dv = Eigen::VectorXd::Constant(1, dz_out);
    for (size_t j = mlp_layers; j-- > 0;) {
        grad.mlp_w[j] += dv * cache.mlp_in[j].transpose();
        grad.mlp_b[j] += dv;
        Eigen::VectorXd du = params.mlp_w[j].transpose() * dv;
        if (j > 0) dv = du.cwiseProduct((cache.mlp_pre[j - 1].array() > 0.0).cast<double>().matrix());
        else {
            // du is d(loss)/d(readout); route into every level below.
            Eigen::VectorXd dreadout = du;
            Eigen::MatrixXd dx_next;  // d wrt pooled features of the level being processed
            for (size_t l = params.conv_w.size(); l-- > 0;) {
                const LevelCache& lc = cache.levels[l];
                int k = static_cast<int>(lc.pooled.rows());
                Eigen::MatrixXd dpooled = Eigen::MatrixXd::Zero(k, cfg.hidden_dim);
                if (dx_next.size() > 0) dpooled = dx_next;
                for (int c = 0; c < cfg.hidden_dim; ++c) {
                    double dmean = dreadout(c) / k;
                    for (int i = 0; i < k; ++i) dpooled(i, c) += dmean;
                    dpooled(lc.max_row[static_cast<size_t>(c)], c) +=
                        dreadout(cfg.hidden_dim + c);
                }

                int n_in = static_cast<int>(lc.h.rows());
                Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(n_in, cfg.hidden_dim);
                Eigen::VectorXd dscore = Eigen::VectorXd::Zero(n_in);
                for (int i = 0; i < k; ++i) {
                    int row = lc.kept[static_cast<size_t>(i)];
                    dh.row(row) += dpooled.row(i) * lc.gate(row);
                    double dgate = dpooled.row(i).dot(lc.h.row(row));
                    dscore(row) = dgate * (1.0 - lc.gate(row) * lc.gate(row));
                }
                dh += dscore * lc.w_hat.transpose();
                Eigen::VectorXd dw_hat = lc.h.transpose() * dscore;
                if (lc.w_norm > 1e-12)
                    grad.pool_w[l] +=
                        (dw_hat - lc.w_hat * lc.w_hat.dot(dw_hat)) / lc.w_norm;

                Eigen::MatrixXd dz =
                    dh.cwiseProduct((lc.z.array() > 0.0).cast<double>().matrix());
                grad.conv_w[l] += lc.ax.transpose() * dz;
                grad.conv_b[l] += dz.colwise().sum().transpose();
                // a_hat is symmetric, so d(x_in) = a_hat * dz * W^T.
                dx_next = lc.a_hat * (dz * params.conv_w[l].transpose());
            }
            break;
        }
    }
}

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw FormatError(std::string("params file truncated while reading ") + what);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void write_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in, const char* what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw FormatError(std::string("params file truncated while reading ") + what);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    write_u32(out, static_cast<uint32_t>(m.rows()));
    write_u32(out, static_cast<uint32_t>(m.cols()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) write_f64(out, m(r, c));
}

Eigen::MatrixXd read_matrix(std::istream& in, int expect_rows, int expect_cols,
                            const char* what) {
    uint32_t rows = read_u32(in, what);
    uint32_t cols = read_u32(in, what);
    if (static_cast<int>(rows) != expect_rows || static_cast<int>(cols) != expect_cols)
        throw ShapeError(std::string(what) + " has shape " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", expected " + std::to_string(expect_rows) +
                         "x" + std::to_string(expect_cols));
    Eigen::MatrixXd m(rows, cols);
    for (uint32_t r = 0; r < rows; ++r)
        for (uint32_t c = 0; c < cols; ++c) m(r, c) = read_f64(in, what);
    return m;
}

constexpr char kMagic[4] = {'C', 'P', 'G', 'P'};
constexpr uint32_t kVersion = 1;

}  // namespace

void PredictorConfig::validate() const {
    if (feat_dim < 1) throw ConfigError("feat_dim must be positive");
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be positive");
    if (conv_layers < 1) throw ConfigError("conv_layers must be >= 1");
    if (!(pool_ratio > 0.0 && pool_ratio <= 1.0))
        throw ConfigError("pool_ratio must be in (0, 1]");
    if (mlp_dims.empty()) throw ConfigError("mlp_dims must be nonempty");
    for (int d : mlp_dims)
        if (d < 1) throw ConfigError("mlp dims must be positive");
}

PredictorParams PredictorParams::init(const PredictorConfig& config, uint64_t seed) {
    config.validate();
    PredictorParams p;
    p.config = config;
    SeededRng root(seed);
    auto glorot = [](Eigen::MatrixXd& m, SeededRng rng) {
        double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
    };
    for (int l = 0; l < config.conv_layers; ++l) {
        int in = (l == 0) ? config.feat_dim : config.hidden_dim;
        Eigen::MatrixXd w(in, config.hidden_dim);
        glorot(w, root.derive("conv", static_cast<uint64_t>(l)));
        p.conv_w.push_back(std::move(w));
        p.conv_b.push_back(Eigen::VectorXd::Zero(config.hidden_dim));
        SeededRng prng = root.derive("pool", static_cast<uint64_t>(l));
        Eigen::VectorXd pw(config.hidden_dim);
        for (int i = 0; i < config.hidden_dim; ++i) pw(i) = prng.gaussian();
        p.pool_w.push_back(std::move(pw));
    }
    int in = config.readout_dim();
    for (size_t j = 0; j <= config.mlp_dims.size(); ++j) {
        int out = (j < config.mlp_dims.size()) ? config.mlp_dims[j] : 1;
        Eigen::MatrixXd w(out, in);
        glorot(w, root.derive("mlp", static_cast<uint64_t>(j)));
        p.mlp_w.push_back(std::move(w));
        p.mlp_b.push_back(Eigen::VectorXd::Zero(out));
        in = out;
    }
    return p;
}

PredictorParams PredictorParams::zeros_like() const {
    PredictorParams z;
    z.config = config;
    for (const auto& w : conv_w) z.conv_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : conv_b) z.conv_b.push_back(Eigen::VectorXd::Zero(b.size()));
    for (const auto& w : pool_w) z.pool_w.push_back(Eigen::VectorXd::Zero(w.size()));
    for (const auto& w : mlp_w) z.mlp_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : mlp_b) z.mlp_b.push_back(Eigen::VectorXd::Zero(b.size()));
    return z;
}

size_t PredictorParams::scalar_count() const {
    size_t n = 0;
    for (const auto& w : conv_w) n += static_cast<size_t>(w.size());
    for (const auto& b : conv_b) n += static_cast<size_t>(b.size());
    for (const auto& w : pool_w) n += static_cast<size_t>(w.size());
    for (const auto& w : mlp_w) n += static_cast<size_t>(w.size());
    for (const auto& b : mlp_b) n += static_cast<size_t>(b.size());
    return n;
}

std::vector<double*> PredictorParams::scalars() {
    std::vector<double*> out;
    out.reserve(scalar_count());
    auto add = [&out](auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
    };
    for (auto& w : conv_w) add(w);
    for (auto& b : conv_b) add(b);
    for (auto& w : pool_w) add(w);
    for (auto& w : mlp_w) add(w);
    for (auto& b : mlp_b) add(b);
    return out;
}

std::vector<const double*> PredictorParams::scalars() const {
    std::vector<const double*> out;
    out.reserve(scalar_count());
    auto add = [&out](const auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
    };
    for (const auto& w : conv_w) add(w);
    for (const auto& b : conv_b) add(b);
    for (const auto& w : pool_w) add(w);
    for (const auto& w : mlp_w) add(w);
    for (const auto& b : mlp_b) add(b);
    return out;
}

double predictor_forward(const PredictorParams& params, const CollageGraph& graph) {
    ForwardCache cache;
    return forward_cached(params, graph, cache);
}

LossGrad loss_and_grad(const PredictorParams& params, std::span<const LabeledCollage> batch) {
    if (batch.empty()) throw ConfigError("loss_and_grad requires a nonempty batch");
    LossGrad result;
    result.grad = params.zeros_like();
    double inv_b = 1.0 / static_cast<double>(batch.size());
    ForwardCache cache;
    double mse = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        double yhat = forward_cached(params, batch[i].graph, cache);
        double residual = yhat - batch[i].y;
        double sample_loss = residual * residual;
        if (!std::isfinite(sample_loss))
            throw NumericError("non-finite loss at batch sample " + std::to_string(i));
        mse += sample_loss * inv_b;
        backward(params, cache, 2.0 * residual * inv_b, result.grad);
    }
    result.mse = mse;
    return result;
}

TrainResult train_predictor(const std::vector<LabeledCollage>& dataset,
                            const PredictorConfig& pcfg, const TrainConfig& tcfg) {
    pcfg.validate();
    if (dataset.size() < 2) throw ConfigError("training needs at least 2 samples");
    if (tcfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (tcfg.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (!(tcfg.val_fraction > 0.0 && tcfg.val_fraction < 1.0))
        throw ConfigError("val_fraction must leave both splits nonempty");

    size_t n = dataset.size();
    size_t val_count = std::max<size_t>(1, static_cast<size_t>(std::llround(
                                               static_cast<double>(n) * tcfg.val_fraction)));
    if (val_count >= n) throw ConfigError("validation split leaves no training data");

    SeededRng root(tcfg.seed);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    {
        SeededRng split_rng = root.derive("split");
        split_rng.shuffle(order);
    }
    std::vector<size_t> train_idx(order.begin(), order.end() - static_cast<long>(val_count));
    std::vector<size_t> val_idx(order.end() - static_cast<long>(val_count), order.end());

    PredictorParams params = PredictorParams::init(pcfg, root.derive("init").next_u64());
    PredictorParams m = params.zeros_like();
    PredictorParams v = params.zeros_like();
    long adam_t = 0;

    auto val_mse_of = [&](const PredictorParams& p) {
        double acc = 0.0;
        for (size_t idx : val_idx) {
            double r = predictor_forward(p, dataset[idx].graph) - dataset[idx].y;
            acc += r * r;
        }
        return acc / static_cast<double>(val_idx.size());
    };

    TrainResult result;
    result.params = params;
    result.best_val_mse = std::numeric_limits<double>::infinity();
    int since_best = 0;

    std::vector<LabeledCollage> batch;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        SeededRng erng = root.derive("epoch", static_cast<uint64_t>(epoch));
        std::vector<size_t> shuffled = train_idx;
        erng.shuffle(shuffled);

        double train_acc = 0.0;
        for (size_t start = 0; start < shuffled.size();
             start += static_cast<size_t>(tcfg.batch_size)) {
            size_t stop = std::min(shuffled.size(), start + static_cast<size_t>(tcfg.batch_size));
            batch.clear();
            for (size_t i = start; i < stop; ++i) batch.push_back(dataset[shuffled[i]]);
            LossGrad lg = loss_and_grad(params, batch);
            train_acc += lg.mse * static_cast<double>(batch.size());

            ++adam_t;
            double bias1 = 1.0 - std::pow(tcfg.adam_beta1, adam_t);
            double bias2 = 1.0 - std::pow(tcfg.adam_beta2, adam_t);
            auto ps = params.scalars();
            auto gs = lg.grad.scalars();
            auto ms = m.scalars();
            auto vs = v.scalars();
            for (size_t i = 0; i < ps.size(); ++i) {
                double g = *gs[i];
                *ms[i] = tcfg.adam_beta1 * *ms[i] + (1.0 - tcfg.adam_beta1) * g;
                *vs[i] = tcfg.adam_beta2 * *vs[i] + (1.0 - tcfg.adam_beta2) * g * g;
                double m_hat = *ms[i] / bias1;
                double v_hat = *vs[i] / bias2;
                *ps[i] -= tcfg.learning_rate * m_hat / (std::sqrt(v_hat) + tcfg.adam_eps);
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_mse = train_acc / static_cast<double>(shuffled.size());
        stats.val_mse = val_mse_of(params);
        result.history.push_back(stats);

        if (stats.val_mse < result.best_val_mse) {
            result.best_val_mse = stats.val_mse;
            result.best_epoch = epoch;
            result.params = params;
            since_best = 0;
        } else if (++since_best >= tcfg.patience) {
            break;
        }
    }
    return result;
}

void save_params(const PredictorParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    const PredictorConfig& cfg = params.config;
    write_u32(out, static_cast<uint32_t>(cfg.feat_dim));
    write_u32(out, static_cast<uint32_t>(cfg.hidden_dim));
    write_u32(out, static_cast<uint32_t>(cfg.conv_layers));
    write_f64(out, cfg.pool_ratio);
    write_u32(out, static_cast<uint32_t>(cfg.mlp_dims.size()));
    for (int d : cfg.mlp_dims) write_u32(out, static_cast<uint32_t>(d));
    for (const auto& w : params.conv_w) write_matrix(out, w);
    for (const auto& b : params.conv_b) write_matrix(out, b);
    for (const auto& w : params.pool_w) write_matrix(out, w);
    for (const auto& w : params.mlp_w) write_matrix(out, w);
    for (const auto& b : params.mlp_b) write_matrix(out, b);
    if (!out) throw FormatError("write failure on '" + path + "'");
}

PredictorParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    char magic[4] = {};
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("'" + path + "' is not a predictor params file");
    uint32_t version = read_u32(in, "version");
    if (version != kVersion)
        throw FormatError("params version " + std::to_string(version) + " unsupported");

    PredictorConfig cfg;
    cfg.feat_dim = static_cast<int>(read_u32(in, "feat_dim"));
    cfg.hidden_dim = static_cast<int>(read_u32(in, "hidden_dim"));
    cfg.conv_layers = static_cast<int>(read_u32(in, "conv_layers"));
    cfg.pool_ratio = read_f64(in, "pool_ratio");
    uint32_t mlp_count = read_u32(in, "mlp layer count");
    cfg.mlp_dims.clear();
    for (uint32_t j = 0; j < mlp_count; ++j)
        cfg.mlp_dims.push_back(static_cast<int>(read_u32(in, "mlp dim")));
    cfg.validate();

    PredictorParams p;
    p.config = cfg;
    for (int l = 0; l < cfg.conv_layers; ++l) {
        int in_dim = (l == 0) ? cfg.feat_dim : cfg.hidden_dim;
        p.conv_w.push_back(read_matrix(in, in_dim, cfg.hidden_dim, "conv weight"));
    }
    for (int l = 0; l < cfg.conv_layers; ++l)
        p.conv_b.push_back(read_matrix(in, cfg.hidden_dim, 1, "conv bias"));
    for (int l = 0; l < cfg.conv_layers; ++l)
        p.pool_w.push_back(read_matrix(in, cfg.hidden_dim, 1, "pool vector"));
    int in_dim = cfg.readout_dim();
    for (size_t j = 0; j <= cfg.mlp_dims.size(); ++j) {
        int out_dim = (j < cfg.mlp_dims.size()) ? cfg.mlp_dims[j] : 1;
        p.mlp_w.push_back(read_matrix(in, out_dim, in_dim, "mlp weight"));
        in_dim = out_dim;
    }
    for (size_t j = 0; j <= cfg.mlp_dims.size(); ++j) {
        int out_dim = (j < cfg.mlp_dims.size()) ? cfg.mlp_dims[j] : 1;
        p.mlp_b.push_back(read_matrix(in, out_dim, 1, "mlp bias"));
    }
    return p;
}

PredictorParams load_params(const std::string& path, const PredictorConfig& expected) {
    PredictorParams p = load_params(path);
    if (!(p.config == expected))
        throw ShapeError("params file '" + path + "' does not match the expected config");
    return p;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << "epoch,train_mse,val_mse\n";
    char line[128];
    for (const EpochStats& s : history) {
        std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", s.epoch, s.train_mse, s.val_mse);
        out << line;
    }
}

}  // namespace collage
