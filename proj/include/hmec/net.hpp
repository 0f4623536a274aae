#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmec/problem.hpp"
#include "hmec/random.hpp"

namespace hmec {

struct NetConfig {
    std::size_t input_dim = 10;
    std::vector<std::size_t> hidden{64, 32};
    std::size_t n_classes = 5; // M + 1 association targets
    double learning_rate = 0.01;
    double momentum = 0.0;
    double fraction_weight = 1.0; // lambda on the fraction MSE term
    std::size_t minibatch = 32;
    std::size_t iterations = 500; // passes over the corpus during supervised fitting
    std::size_t plateau = 50;     // stop when the loss has not improved for this many passes
    std::uint64_t seed = 1;

    static NetConfig for_nodes(std::size_t m) {
        NetConfig c;
        c.input_dim = 2 * m + 2;
        c.n_classes = m + 1;
        return c;
    }

    void validate() const {
        if (input_dim < 1) throw std::invalid_argument("net: input_dim must be >= 1");
        if (n_classes < 1) throw std::invalid_argument("net: n_classes must be >= 1");
        for (auto h : hidden)
            if (h < 1) throw std::invalid_argument("net: hidden widths must be >= 1");
        if (learning_rate < 0) throw std::invalid_argument("net: learning_rate must be >= 0");
        if (momentum < 0 || momentum >= 1) throw std::invalid_argument("net: momentum must lie in [0,1)");
        if (minibatch < 1) throw std::invalid_argument("net: minibatch must be >= 1");
    }
};

/// One supervised pair: encoded input, target association class, and the
/// target fraction of the chosen node's capacity.
struct Sample {
    std::vector<double> input;
    int target_assoc = 0;
    double target_fraction = 1.0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct NetOutput {
    std::vector<double> probs;
    double fraction = 0.5;

    int argmax() const {
        return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
};

/// Shannon entropy in nats, 0 ln 0 := 0.
inline double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double q : p)
        if (q > 0) h -= q * std::log(q);
    return std::fmax(h, 0.0);
}

// ---------------------------------------------------------------------------
// Feature encoding

/// Raw per-UE feature vector in fixed order: gains (dB), F (Gcycles),
/// D (Mbit), W (Gcycles/s). Length 2M + 2.
inline std::vector<double> raw_features(std::span<const double> gains, double cycles, double bits,
                                        std::span<const double> avg_alloc) {
    std::vector<double> x;
    x.reserve(gains.size() + 2 + avg_alloc.size());
    for (double g : gains) x.push_back(10.0 * std::log10(std::fmax(g, 1e-300)));
    x.push_back(cycles * 1e-9);
    x.push_back(bits * 1e-6);
    for (double w : avg_alloc) x.push_back(w * 1e-9);
    return x;
}

/// Z-score statistics fitted on a corpus of raw feature vectors.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> scale;

    std::size_t dim() const { return mean.size(); }

    static NormStats fit(std::span<const std::vector<double>> rows) {
        if (rows.empty()) throw std::invalid_argument("NormStats::fit: empty corpus");
        const std::size_t d = rows.front().size();
        NormStats s;
        s.mean.assign(d, 0.0);
        s.scale.assign(d, 0.0);
        for (const auto& r : rows)
            for (std::size_t k = 0; k < d; ++k) s.mean[k] += r[k];
        for (auto& v : s.mean) v /= static_cast<double>(rows.size());
        for (const auto& r : rows)
            for (std::size_t k = 0; k < d; ++k) s.scale[k] += (r[k] - s.mean[k]) * (r[k] - s.mean[k]);
        for (auto& v : s.scale) {
            v = std::sqrt(v / static_cast<double>(rows.size()));
            if (!(v > 1e-12)) v = 1.0; // zero-variance feature
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> raw) const {
        if (raw.size() != mean.size()) throw std::invalid_argument("NormStats::apply: dimension mismatch");
        std::vector<double> z(raw.size());
        for (std::size_t k = 0; k < raw.size(); ++k) z[k] = (raw[k] - mean[k]) / scale[k];
        return z;
    }

    friend bool operator==(const NormStats&, const NormStats&) = default;
};

inline std::vector<double> encode(std::span<const double> gains, double cycles, double bits,
                                  std::span<const double> avg_alloc, const NormStats& norm) {
    return norm.apply(raw_features(gains, cycles, bits, avg_alloc));
}

// ---------------------------------------------------------------------------
// Network

/// Feed-forward net: ReLU hidden layers, a linear output layer whose first
/// n_classes units feed a softmax (association) and last unit a sigmoid
/// (resource fraction).
class Mlp {
public:
    struct Gradients {
        std::vector<Eigen::MatrixXd> dW;
        std::vector<Eigen::VectorXd> db;
    };

    Mlp() = default;

    explicit Mlp(NetConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        std::vector<std::size_t> widths{cfg_.input_dim};
        widths.insert(widths.end(), cfg_.hidden.begin(), cfg_.hidden.end());
        widths.push_back(cfg_.n_classes + 1);
        Rng rng = make_rng(cfg_.seed, 0x4E);
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const auto in = static_cast<Eigen::Index>(widths[l]);
            const auto out = static_cast<Eigen::Index>(widths[l + 1]);
            const double limit = std::sqrt(6.0 / static_cast<double>(in)); // He-uniform
            Eigen::MatrixXd w(out, in);
            for (Eigen::Index r = 0; r < out; ++r)
                for (Eigen::Index c = 0; c < in; ++c) w(r, c) = uniform(rng, -limit, limit);
            weights_.push_back(std::move(w));
            biases_.push_back(Eigen::VectorXd::Zero(out));
        }
        reset_momentum();
    }

    const NetConfig& config() const { return cfg_; }
    NetConfig& config() { return cfg_; }
    std::size_t n_layers() const { return weights_.size(); }
    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
    std::vector<Eigen::MatrixXd>& weights() { return weights_; }
    std::vector<Eigen::VectorXd>& biases() { return biases_; }

    std::size_t n_params() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
        return n;
    }

    void zero_output_layer() {
        weights_.back().setZero();
        biases_.back().setZero();
    }

    NetOutput forward(std::span<const double> x) const {
        if (x.size() != cfg_.input_dim) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
        Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        Eigen::MatrixXd z = pre_output(in);
        NetOutput out;
        auto p = softmax_col(z.col(0).head(static_cast<Eigen::Index>(cfg_.n_classes)));
        out.probs.assign(p.data(), p.data() + p.size());
        out.fraction = sigmoid(z(static_cast<Eigen::Index>(cfg_.n_classes), 0));
        return out;
    }

    /// Mean loss: cross-entropy on the association plus
    /// fraction_weight * squared error on the fraction.
    double loss(std::span<const Sample> batch) const {
        if (batch.empty()) return 0.0;
        Eigen::MatrixXd z = pre_output(stack(batch));
        double total = 0.0;
        const auto k = static_cast<Eigen::Index>(cfg_.n_classes);
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            const auto& s = batch[static_cast<std::size_t>(c)];
            total += cross_entropy(z.col(c).head(k), s.target_assoc);
            const double e = sigmoid(z(k, c)) - s.target_fraction;
            total += cfg_.fraction_weight * e * e;
        }
        return total / static_cast<double>(batch.size());
    }

    /// Loss and its gradient by backpropagation.
    double gradient(std::span<const Sample> batch, Gradients& g) const {
        const std::size_t L = weights_.size();
        std::vector<Eigen::MatrixXd> acts;
        acts.reserve(L + 1);
        acts.push_back(stack(batch));
        for (std::size_t l = 0; l < L; ++l) {
            Eigen::MatrixXd z = (weights_[l] * acts.back()).colwise() + biases_[l];
            if (l + 1 < L) z = z.cwiseMax(0.0);
            acts.push_back(std::move(z));
        }
        const Eigen::MatrixXd& z = acts.back();
        const auto k = static_cast<Eigen::Index>(cfg_.n_classes);
        const double inv_b = 1.0 / static_cast<double>(batch.size());
        Eigen::MatrixXd delta(z.rows(), z.cols());
        double total = 0.0;
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            const auto& s = batch[static_cast<std::size_t>(c)];
            Eigen::VectorXd p = softmax_col(z.col(c).head(k));
            total += -std::log(std::fmax(p(s.target_assoc), std::numeric_limits<double>::min()));
            p(s.target_assoc) -= 1.0;
            delta.col(c).head(k) = p * inv_b;
            const double sg = sigmoid(z(k, c));
            const double e = sg - s.target_fraction;
            total += cfg_.fraction_weight * e * e;
            delta(k, c) = cfg_.fraction_weight * 2.0 * e * sg * (1.0 - sg) * inv_b;
        }
        g.dW.resize(L);
        g.db.resize(L);
        for (std::size_t l = L; l-- > 0;) {
            g.dW[l] = delta * acts[l].transpose();
            g.db[l] = delta.rowwise().sum();
            if (l > 0) {
                Eigen::MatrixXd back = weights_[l].transpose() * delta;
                delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
            }
        }
        return total * inv_b;
    }

    /// One gradient-descent step (with optional momentum). Returns the loss
    /// at the weights before the update.
    double train_step(std::span<const Sample> batch, double lr) {
        if (batch.empty()) throw std::invalid_argument("Mlp::train_step: empty batch");
        Gradients g;
        const double l = gradient(batch, g);
        if (!std::isfinite(l)) {
            std::ostringstream os;
            os << "Mlp::train_step: non-finite loss " << l << " (batch " << batch.size() << ", lr " << lr
               << ", max |W| " << max_abs_weight() << ")";
            throw std::runtime_error(os.str());
        }
        const double mu = cfg_.momentum;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            if (mu > 0) {
                vel_w_[k] = mu * vel_w_[k] - lr * g.dW[k];
                vel_b_[k] = mu * vel_b_[k] - lr * g.db[k];
                weights_[k] += vel_w_[k];
                biases_[k] += vel_b_[k];
            } else {
                weights_[k] -= lr * g.dW[k];
                biases_[k] -= lr * g.db[k];
            }
        }
        return l;
    }

    void reset_momentum() {
        vel_w_.clear();
        vel_b_.clear();
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            vel_w_.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
            vel_b_.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
        }
    }

    double max_abs_weight() const {
        double m = 0.0;
        for (const auto& w : weights_) m = std::fmax(m, w.cwiseAbs().maxCoeff());
        return m;
    }

    bool same_parameters(const Mlp& o) const {
        if (weights_.size() != o.weights_.size()) return false;
        for (std::size_t l = 0; l < weights_.size(); ++l)
            if (weights_[l] != o.weights_[l] || biases_[l] != o.biases_[l]) return false;
        return true;
    }

private:
    static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

    static Eigen::VectorXd softmax_col(const Eigen::VectorXd& z) {
        Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
        return e / e.sum();
    }

    static double cross_entropy(const Eigen::VectorXd& z, int target) {
        const double mx = z.maxCoeff();
        const double lse = mx + std::log((z.array() - mx).exp().sum());
        return lse - z(target);
    }

    Eigen::MatrixXd stack(std::span<const Sample> batch) const {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(cfg_.input_dim), static_cast<Eigen::Index>(batch.size()));
        for (std::size_t c = 0; c < batch.size(); ++c) {
            if (batch[c].input.size() != cfg_.input_dim) throw std::invalid_argument("Mlp: sample dimension mismatch");
            if (batch[c].target_assoc < 0 || batch[c].target_assoc >= static_cast<int>(cfg_.n_classes))
                throw std::invalid_argument("Mlp: target class out of range");
            for (std::size_t r = 0; r < cfg_.input_dim; ++r)
                x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = batch[c].input[r];
        }
        return x;
    }

    Eigen::MatrixXd pre_output(Eigen::MatrixXd a) const {
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
            a = l + 1 < weights_.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
        }
        return a;
    }

    NetConfig cfg_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    std::vector<Eigen::MatrixXd> vel_w_;
    std::vector<Eigen::VectorXd> vel_b_;
};

struct FitReport {
    std::vector<double> loss_history; // mean minibatch loss per pass
    double initial_loss = 0.0;        // full-corpus loss before training
    double final_loss = 0.0;          // full-corpus loss after training
    std::size_t passes = 0;
};

/// Minibatch gradient descent over the corpus until the pass loss plateaus
/// for `plateau` passes or `iterations` passes have run.
inline FitReport fit(Mlp& net, std::span<const Sample> corpus, std::uint64_t seed) {
    FitReport rep;
    if (corpus.empty()) throw std::invalid_argument("fit: empty corpus");
    const auto& cfg = net.config();
    rep.initial_loss = net.loss(corpus);
    Rng rng = make_rng(seed, 0xF17);
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::vector<Sample> mb;
    for (std::size_t pass = 0; pass < cfg.iterations; ++pass) {
        shuffle(order, rng);
        double sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t s = 0; s < order.size(); s += cfg.minibatch) {
            mb.clear();
            for (std::size_t k = s; k < std::min(order.size(), s + cfg.minibatch); ++k) mb.push_back(corpus[order[k]]);
            sum += net.train_step(mb, cfg.learning_rate);
            ++steps;
        }
        const double pass_loss = sum / static_cast<double>(steps);
        rep.loss_history.push_back(pass_loss);
        rep.passes = pass + 1;
        if (pass_loss < best * (1.0 - 1e-4)) {
            best = pass_loss;
            since_best = 0;
        } else if (++since_best >= cfg.plateau) {
            break;
        }
    }
    rep.final_loss = net.loss(corpus);
    return rep;
}

// ---------------------------------------------------------------------------
// Serialization
//
// Text layout, one token stream, doubles in hexfloat for exact round trips:
//   hmec-net 1
//   input <d> classes <k> hidden <h> <w1> ... <wh>
//   lr <lr> momentum <mu> lambda <l> minibatch <b> iterations <i> plateau <p> seed <s>
//   layer <index> <rows> <cols>
//   <rows*cols weights, row-major>
//   <rows biases>
//   ... one block per layer

namespace detail {

inline void write_doubles(std::ostream& os, const double* p, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) os << (k ? " " : "") << std::hexfloat << p[k];
    os << std::defaultfloat << '\n';
}

inline double read_double(std::istream& is) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("unexpected end of stream");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw std::runtime_error("bad number '" + tok + "'");
    return v;
}

inline void expect(std::istream& is, const std::string& word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw std::runtime_error("expected '" + word + "', got '" + tok + "'");
}

} // namespace detail

inline constexpr int kNetFormatVersion = 1;

inline void save_net(std::ostream& os, const Mlp& net) {
    const auto& c = net.config();
    os << "hmec-net " << kNetFormatVersion << '\n';
    os << "input " << c.input_dim << " classes " << c.n_classes << " hidden " << c.hidden.size();
    for (auto h : c.hidden) os << ' ' << h;
    os << '\n';
    os << "lr " << std::hexfloat << c.learning_rate << " momentum " << c.momentum << " lambda " << c.fraction_weight
       << std::defaultfloat << " minibatch " << c.minibatch << " iterations " << c.iterations << " plateau "
       << c.plateau << " seed " << c.seed << '\n';
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const auto& w = net.weights()[l];
        os << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = w;
        detail::write_doubles(os, rm.data(), static_cast<std::size_t>(rm.size()));
        detail::write_doubles(os, net.biases()[l].data(), static_cast<std::size_t>(net.biases()[l].size()));
    }
}

inline Mlp load_net(std::istream& is) {
    detail::expect(is, "hmec-net");
    int version = 0;
    is >> version;
    if (version != kNetFormatVersion) throw std::runtime_error("load_net: unsupported version " + std::to_string(version));
    NetConfig c;
    std::size_t nh = 0;
    detail::expect(is, "input");
    is >> c.input_dim;
    detail::expect(is, "classes");
    is >> c.n_classes;
    detail::expect(is, "hidden");
    is >> nh;
    c.hidden.resize(nh);
    for (auto& h : c.hidden) is >> h;
    detail::expect(is, "lr");
    c.learning_rate = detail::read_double(is);
    detail::expect(is, "momentum");
    c.momentum = detail::read_double(is);
    detail::expect(is, "lambda");
    c.fraction_weight = detail::read_double(is);
    detail::expect(is, "minibatch");
    is >> c.minibatch;
    detail::expect(is, "iterations");
    is >> c.iterations;
    detail::expect(is, "plateau");
    is >> c.plateau;
    detail::expect(is, "seed");
    is >> c.seed;
    if (!is) throw std::runtime_error("load_net: malformed header");
    Mlp net(c);
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        detail::expect(is, "layer");
        std::size_t idx = 0;
        Eigen::Index rows = 0, cols = 0;
        is >> idx >> rows >> cols;
        auto& w = net.weights()[l];
        if (idx != l || rows != w.rows() || cols != w.cols()) throw std::runtime_error("load_net: layer shape mismatch");
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index col = 0; col < cols; ++col) w(r, col) = detail::read_double(is);
        for (Eigen::Index r = 0; r < rows; ++r) net.biases()[l](r) = detail::read_double(is);
    }
    net.reset_momentum();
    return net;
}

inline void save_norm(std::ostream& os, const NormStats& n) {
    os << "norm " << n.dim() << '\n';
    detail::write_doubles(os, n.mean.data(), n.dim());
    detail::write_doubles(os, n.scale.data(), n.dim());
}

inline NormStats load_norm(std::istream& is) {
    detail::expect(is, "norm");
    std::size_t d = 0;
    is >> d;
    NormStats n;
    n.mean.resize(d);
    n.scale.resize(d);
    for (auto& v : n.mean) v = detail::read_double(is);
    for (auto& v : n.scale) v = detail::read_double(is);
    return n;
}

} // namespace hmec
