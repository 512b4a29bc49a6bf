#include "relus/core.hpp"

#include <cmath>
#include <stdexcept>

namespace relus {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    return dot(a.data(), b.data(), a.size());
}

double norm2(const Vec& a) { return std::sqrt(dot(a.data(), a.data(), a.size())); }

double row_norm2(const Matrix& m, std::size_t j) {
    return std::sqrt(dot(m.row(j), m.row(j), m.cols));
}

double frobenius_sq(const Matrix& m) { return dot(m.data.data(), m.data.data(), m.data.size()); }

double frobenius_inner(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("frobenius_inner: shape mismatch");
    return dot(a.data.data(), b.data.data(), a.data.size());
}

void Dataset::validate() const {
    for (const Sample& s : samples) {
        if (s.y != 1 && s.y != -1) throw std::invalid_argument("Dataset: label must be +-1");
        if (norm2(s.x) > 1.0 + 1e-12) throw std::invalid_argument("Dataset: sample outside unit ball");
        if (s.x.size() != dim()) throw std::invalid_argument("Dataset: inconsistent dimensions");
    }
    if (separator) {
        if (separator->size() != dim())
            throw std::invalid_argument("Dataset: separator dimension mismatch");
        for (const Sample& s : samples) {
            if (s.y * dot(*separator, s.x) < 1.0 - 1e-9)
                throw std::invalid_argument("Dataset: separator misses margin 1");
        }
    }
}

Network::Network(Matrix first_layer, Vec second_layer)
    : weights_(std::move(first_layer)), v_(std::move(second_layer)) {
    if (weights_.rows != v_.size())
        throw std::invalid_argument("Network: first-layer rows must match |v|");
    if (v_.size() < 2) throw std::invalid_argument("Network: k >= 2 required");
    v_min_ = std::abs(v_[0]);
    for (double vj : v_) {
        if (vj == 0.0 || !std::isfinite(vj))
            throw std::invalid_argument("Network: v entries must be finite and non-zero");
        if (vj > 0.0) ++v_pos_; else ++v_neg_;
        v_min_ = std::min(v_min_, std::abs(vj));
        v_sq_ += vj * vj;
    }
    if (v_pos_ == 0 || v_neg_ == 0)
        throw std::invalid_argument("Network: v needs entries of both signs");
    for (double w : weights_.data)
        if (!std::isfinite(w)) throw std::invalid_argument("Network: non-finite weight");
}

Vec default_second_layer(std::size_t k) {
    Vec v(k);
    for (std::size_t j = 0; j < k; ++j) v[j] = (j < k / 2) ? 1.0 : -1.0;
    return v;
}

double forward(const Network& net, const Vec& x) {
    if (x.size() != net.d()) throw std::invalid_argument("forward: dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < net.k(); ++j) {
        const double z = dot(net.weights().row(j), x.data(), x.size());
        if (z > 0.0) s += net.v()[j] * z;
    }
    return s;
}

int predict(const Network& net, const Vec& x) { return forward(net, x) >= 0.0 ? 1 : -1; }

double hinge(double z) { return z < 1.0 ? 1.0 - z : 0.0; }

double empirical_loss(const Network& net, const Dataset& data) {
    if (data.samples.empty()) throw std::invalid_argument("empirical_loss: empty dataset");
    double s = 0.0;
    for (const Sample& smp : data.samples) s += hinge(smp.y * forward(net, smp.x));
    return s / static_cast<double>(data.size());
}

double training_error(const Network& net, const Dataset& data) {
    if (data.samples.empty()) throw std::invalid_argument("training_error: empty dataset");
    std::size_t wrong = 0;
    for (const Sample& smp : data.samples)
        if (predict(net, smp.x) != smp.y) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

Matrix subgradient(const Network& net, const Sample& s) {
    if (s.x.size() != net.d()) throw std::invalid_argument("subgradient: dimension mismatch");
    Matrix g(net.k(), net.d());
    const double margin = s.y * forward(net, s.x);
    if (margin >= 1.0) return g;  // loss indicator off
    for (std::size_t j = 0; j < net.k(); ++j) {
        if (dot(net.weights().row(j), s.x.data(), s.x.size()) >= 0.0) {
            const double c = -static_cast<double>(s.y) * net.v()[j];
            double* gj = g.row(j);
            for (std::size_t i = 0; i < net.d(); ++i) gj[i] = c * s.x[i];
        }
    }
    return g;
}

double leaky_forward(const Network& net, const Vec& x, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("leaky_forward: alpha must lie in (0,1)");
    if (x.size() != net.d()) throw std::invalid_argument("leaky_forward: dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < net.k(); ++j) {
        const double z = dot(net.weights().row(j), x.data(), x.size());
        s += net.v()[j] * (z >= 0.0 ? z : alpha * z);
    }
    return s;
}

}  // namespace relus
