#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace relus {

using Vec = std::vector<double>;

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t j) { return data.data() + j * cols; }
    const double* row(std::size_t j) const { return data.data() + j * cols; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    bool operator==(const Matrix& o) const = default;
};

double dot(const double* a, const double* b, std::size_t n);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double row_norm2(const Matrix& m, std::size_t j);
double frobenius_sq(const Matrix& m);
double frobenius_inner(const Matrix& a, const Matrix& b);

/// One labeled point: feature vector in the unit ball, label in {-1, +1}.
struct Sample {
    Vec x;
    int y = 1;
};

/// Ordered list of samples, optionally carrying a margin-1 linear witness.
struct Dataset {
    std::vector<Sample> samples;
    std::optional<Vec> separator;

    std::size_t size() const { return samples.size(); }
    std::size_t dim() const { return samples.empty() ? 0 : samples.front().x.size(); }

    /// Throws if any sample leaves the unit ball, a label is not +-1, or the
    /// witness (when present) misses margin 1 on some sample.
    void validate() const;
};

/// Two-layer ReLU network: trainable first layer W (k x d) and a fixed second
/// layer v with at least one positive and one negative entry, none zero.
class Network {
public:
    Network(Matrix first_layer, Vec second_layer);

    const Matrix& weights() const { return weights_; }
    Matrix& weights() { return weights_; }
    const Vec& v() const { return v_; }
    std::size_t k() const { return weights_.rows; }
    std::size_t d() const { return weights_.cols; }

    double v_min() const { return v_min_; }        // min_j |v_j|
    double v_sq_norm() const { return v_sq_; }     // ||v||_2^2
    int v_positive_count() const { return v_pos_; }
    int v_negative_count() const { return v_neg_; }

private:
    Matrix weights_;
    Vec v_;
    double v_min_ = 0.0;
    double v_sq_ = 0.0;
    int v_pos_ = 0;
    int v_neg_ = 0;
};

/// Second layer used throughout: first floor(k/2) entries +1, the rest -1.
Vec default_second_layer(std::size_t k);

/// Network score sum_j v_j * max(0, <w_j, x>).
double forward(const Network& net, const Vec& x);

/// Sign classifier: +1 when the score is >= 0, else -1.
int predict(const Network& net, const Vec& x);

/// Hinge loss max(0, 1 - z).
double hinge(double z);

/// Average hinge loss of y_i * forward(x_i) over the dataset.
double empirical_loss(const Network& net, const Dataset& data);

/// Misclassification rate under predict().
double training_error(const Network& net, const Dataset& data);

/// Exact subgradient of the per-sample hinge loss with respect to W.
/// Row-j activity indicator is inclusive at zero: <w_j, x> >= 0 counts active.
Matrix subgradient(const Network& net, const Sample& s);

/// Leaky-ReLU score: slope 1 on [0, inf), slope alpha on (-inf, 0).
double leaky_forward(const Network& net, const Vec& x, double alpha);

}  // namespace relus
