#include "metaiot/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "metaiot/error.hpp"

namespace metaiot {

namespace {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int ceil_div(int a, int b) { return (a + b - 1) / b; }

int cube(int k) { return k * k * k; }

// Offsets of each block inside the flat weight vector.
//   fc:     W0 (fc_out x L*N), b0 (fc_out)
//   deconv: Wd (C1*K^3 x C0),  bd (C1)
//   conv1:  W1 (C2 x C1*k^3),  b1 (C2)
//   conv2:  W2 (N_s x C2*k^3), b2 (N_s)
// fc_only keeps just W0 (N_s*M x L*N) and b0.
struct Layout {
    Index w0 = 0, b0 = 0, wd = 0, bd = 0, w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;

    explicit Layout(const NetworkArch& a)
    {
        const Index in = a.input_size();
        const Index fc = a.fc_out();
        w0 = 0;
        b0 = w0 + fc * in;
        total = b0 + fc;
        if (a.fc_only) return;
        wd = total;
        bd = wd + Index(a.deconv_channels) * cube(a.deconv_kernel) * a.fc_channels;
        w1 = bd + a.deconv_channels;
        b1 = w1 + Index(a.conv1_channels) * a.deconv_channels * cube(a.conv1_kernel);
        w2 = b1 + a.conv1_channels;
        b2 = w2 + Index(a.n_conditions) * a.conv1_channels * cube(a.conv2_kernel);
        total = b2 + a.n_conditions;
    }
};

// For every (kernel offset, small-grid voxel) the matching big-grid voxel or -1.
// Deconvolution: small = input voxel, big = output voxel at i*s - p + k.
// Convolution:   small = output voxel, big = input voxel at o - p + k.
std::vector<int> build_index(std::array<int, 3> small, std::array<int, 3> big, int kernel, int stride, int pad,
                             bool transposed)
{
    const int k3 = cube(kernel);
    const int vs = small[0] * small[1] * small[2];
    std::vector<int> idx(static_cast<std::size_t>(k3) * vs, -1);
    for (int kz = 0; kz < kernel; ++kz)
        for (int ky = 0; ky < kernel; ++ky)
            for (int kx = 0; kx < kernel; ++kx) {
                const int k = (kz * kernel + ky) * kernel + kx;
                for (int z = 0; z < small[2]; ++z)
                    for (int y = 0; y < small[1]; ++y)
                        for (int x = 0; x < small[0]; ++x) {
                            const int v = (z * small[1] + y) * small[0] + x;
                            int bx, by, bz;
                            if (transposed) {
                                bx = x * stride - pad + kx;
                                by = y * stride - pad + ky;
                                bz = z * stride - pad + kz;
                            } else {
                                bx = x - pad + kx;
                                by = y - pad + ky;
                                bz = z - pad + kz;
                            }
                            if (bx < 0 || by < 0 || bz < 0 || bx >= big[0] || by >= big[1] || bz >= big[2]) continue;
                            idx[static_cast<std::size_t>(k) * vs + v] = (bz * big[1] + by) * big[0] + bx;
                        }
            }
    return idx;
}

double leaky(double a) { return a > 0 ? a : kLeakySlope * a; }
double leaky_grad(double a) { return a > 0 ? 1.0 : kLeakySlope; }

// cols(c * k3 + k, v) = map(c, idx[k][v])
void gather(const MatrixXd& map, const std::vector<int>& idx, int k3, MatrixXd& cols)
{
    const Index channels = map.rows();
    const Index vs = static_cast<Index>(idx.size()) / k3;
    cols.setZero(channels * k3, vs);
    for (Index v = 0; v < vs; ++v) {
        for (int k = 0; k < k3; ++k) {
            const int b = idx[static_cast<std::size_t>(k) * vs + v];
            if (b < 0) continue;
            for (Index c = 0; c < channels; ++c) cols(c * k3 + k, v) = map(c, b);
        }
    }
}

// map(c, idx[k][v]) += cols(c * k3 + k, v)
void scatter_add(const MatrixXd& cols, const std::vector<int>& idx, int k3, MatrixXd& map)
{
    const Index channels = map.rows();
    const Index vs = static_cast<Index>(idx.size()) / k3;
    for (Index v = 0; v < vs; ++v) {
        for (int k = 0; k < k3; ++k) {
            const int b = idx[static_cast<std::size_t>(k) * vs + v];
            if (b < 0) continue;
            for (Index c = 0; c < channels; ++c) map(c, b) += cols(c * k3 + k, v);
        }
    }
}

class Network {
public:
    explicit Network(const NetworkArch& arch) : arch_(arch), layout_(arch)
    {
        validate(arch);
        if (arch.fc_only) return;
        coarse_ = arch.coarse_grid();
        deconv_idx_ = build_index(coarse_, arch.grid, arch.deconv_kernel, arch.deconv_stride,
                                  (arch.deconv_kernel - arch.deconv_stride) / 2, true);
        conv1_idx_ = build_index(arch.grid, arch.grid, arch.conv1_kernel, 1, (arch.conv1_kernel - 1) / 2, false);
        conv2_idx_ = build_index(arch.grid, arch.grid, arch.conv2_kernel, 1, (arch.conv2_kernel - 1) / 2, false);
    }

    const Layout& layout() const noexcept { return layout_; }

    // Activations kept for the backward pass.
    struct Cache {
        VectorXd x, a0, h0;
        MatrixXd cols_d, a1, h1, cols1, a2, h2, cols2, y;
    };

    const MatrixXd& run(const VectorXd& w, const VectorXd& x, Cache& c) const
    {
        const auto& a = arch_;
        const Index in = a.input_size();
        const Index fc = a.fc_out();
        const Index m = a.cells();
        c.x = x;
        const Map<const MatrixXd> w0(w.data() + layout_.w0, fc, in);
        c.a0 = w0 * x + w.segment(layout_.b0, fc);
        if (a.fc_only) {
            c.y = Map<const MatrixXd>(c.a0.data(), a.n_conditions, m);
            return c.y;
        }
        c.h0 = c.a0.unaryExpr(&leaky);

        const int kd3 = cube(a.deconv_kernel);
        const Index v0 = fc / a.fc_channels;
        const Map<const MatrixXd> h0(c.h0.data(), a.fc_channels, v0);
        const Map<const MatrixXd> wd(w.data() + layout_.wd, Index(a.deconv_channels) * kd3, a.fc_channels);
        c.cols_d.noalias() = wd * h0;
        c.a1 = w.segment(layout_.bd, a.deconv_channels).replicate(1, m);
        scatter_add(c.cols_d, deconv_idx_, kd3, c.a1);
        c.h1 = c.a1.unaryExpr(&leaky);

        const int k1 = cube(a.conv1_kernel);
        gather(c.h1, conv1_idx_, k1, c.cols1);
        const Map<const MatrixXd> w1(w.data() + layout_.w1, a.conv1_channels, Index(a.deconv_channels) * k1);
        c.a2.noalias() = w1 * c.cols1;
        c.a2.colwise() += w.segment(layout_.b1, a.conv1_channels);
        c.h2 = c.a2.unaryExpr(&leaky);

        const int k2 = cube(a.conv2_kernel);
        gather(c.h2, conv2_idx_, k2, c.cols2);
        const Map<const MatrixXd> w2(w.data() + layout_.w2, a.n_conditions, Index(a.conv1_channels) * k2);
        c.y.noalias() = w2 * c.cols2;
        c.y.colwise() += w.segment(layout_.b2, a.n_conditions);
        return c.y;
    }

    // Accumulates d(loss)/d(w) into grad given d(loss)/d(y) for the cached pass.
    void back(const VectorXd& w, const Cache& c, const MatrixXd& dy, VectorXd& grad) const
    {
        const auto& a = arch_;
        const Index in = a.input_size();
        const Index fc = a.fc_out();
        VectorXd da0;
        if (a.fc_only) {
            da0 = Map<const VectorXd>(dy.data(), dy.size());
        } else {
            const int k2 = cube(a.conv2_kernel);
            const Map<const MatrixXd> w2(w.data() + layout_.w2, a.n_conditions, Index(a.conv1_channels) * k2);
            Map<MatrixXd>(grad.data() + layout_.w2, w2.rows(), w2.cols()).noalias() += dy * c.cols2.transpose();
            grad.segment(layout_.b2, a.n_conditions) += dy.rowwise().sum();
            const MatrixXd dcols2 = w2.transpose() * dy;
            MatrixXd dh2 = MatrixXd::Zero(c.h2.rows(), c.h2.cols());
            scatter_add(dcols2, conv2_idx_, k2, dh2);
            const MatrixXd da2 = dh2.cwiseProduct(c.a2.unaryExpr(&leaky_grad));

            const int k1 = cube(a.conv1_kernel);
            const Map<const MatrixXd> w1(w.data() + layout_.w1, a.conv1_channels, Index(a.deconv_channels) * k1);
            Map<MatrixXd>(grad.data() + layout_.w1, w1.rows(), w1.cols()).noalias() += da2 * c.cols1.transpose();
            grad.segment(layout_.b1, a.conv1_channels) += da2.rowwise().sum();
            const MatrixXd dcols1 = w1.transpose() * da2;
            MatrixXd dh1 = MatrixXd::Zero(c.h1.rows(), c.h1.cols());
            scatter_add(dcols1, conv1_idx_, k1, dh1);
            const MatrixXd da1 = dh1.cwiseProduct(c.a1.unaryExpr(&leaky_grad));

            const int kd3 = cube(a.deconv_kernel);
            const Index v0 = fc / a.fc_channels;
            grad.segment(layout_.bd, a.deconv_channels) += da1.rowwise().sum();
            MatrixXd dcols_d;
            gather(da1, deconv_idx_, kd3, dcols_d);
            const Map<const MatrixXd> h0(c.h0.data(), a.fc_channels, v0);
            const Map<const MatrixXd> wd(w.data() + layout_.wd, Index(a.deconv_channels) * kd3, a.fc_channels);
            Map<MatrixXd>(grad.data() + layout_.wd, wd.rows(), wd.cols()).noalias() += dcols_d * h0.transpose();
            const MatrixXd dh0 = wd.transpose() * dcols_d;
            da0 = Map<const VectorXd>(dh0.data(), dh0.size()).cwiseProduct(c.a0.unaryExpr(&leaky_grad));
        }
        Map<MatrixXd>(grad.data() + layout_.w0, fc, in).noalias() += da0 * c.x.transpose();
        grad.segment(layout_.b0, fc) += da0;
    }

private:
    NetworkArch arch_;
    Layout layout_;
    std::array<int, 3> coarse_{};
    std::vector<int> deconv_idx_, conv1_idx_, conv2_idx_;
};

void check_sample(const NetworkArch& arch, const LabeledSample& s)
{
    if (s.measurement.rows() != arch.input_rows || s.measurement.cols() != arch.input_cols) {
        throw ShapeError("measurement is " + std::to_string(s.measurement.rows()) + "x" +
                         std::to_string(s.measurement.cols()) + ", network expects " +
                         std::to_string(arch.input_rows) + "x" + std::to_string(arch.input_cols));
    }
    if (s.truth.rows() != arch.n_conditions || s.truth.cols() != arch.cells()) {
        throw ShapeError("truth field shape does not match the network output");
    }
}

void check_norm(const NetworkArch& arch, const Normalization& n)
{
    if (n.input_mean.size() != arch.input_size() || n.input_std.size() != arch.input_size() ||
        n.cond_min.size() != arch.n_conditions || n.cond_max.size() != arch.n_conditions) {
        throw ShapeError("normalization statistics do not match the architecture");
    }
}

} // namespace

std::array<int, 3> NetworkArch::coarse_grid() const noexcept
{
    return {ceil_div(grid[0], deconv_stride), ceil_div(grid[1], deconv_stride), ceil_div(grid[2], deconv_stride)};
}

int NetworkArch::fc_out() const noexcept
{
    if (fc_only) return output_size();
    const auto c = coarse_grid();
    return fc_channels * c[0] * c[1] * c[2];
}

Eigen::Index NetworkArch::parameter_count() const noexcept { return Layout(*this).total; }

void validate(const NetworkArch& a)
{
    if (a.input_rows < 1 || a.input_cols < 1) throw ConfigError("network input dims must be positive");
    if (a.n_conditions < 1) throw ConfigError("network needs at least one output condition");
    if (a.grid[0] < 1 || a.grid[1] < 1 || a.grid[2] < 1) throw ConfigError("network grid dims must be positive");
    if (a.fc_only) return;
    if (a.fc_channels < 1 || a.deconv_channels < 1 || a.conv1_channels < 1) {
        throw ConfigError("layer channel counts must be positive");
    }
    if (a.deconv_stride < 1 || a.deconv_kernel < a.deconv_stride || (a.deconv_kernel - a.deconv_stride) % 2 != 0) {
        throw ConfigError("deconv kernel - stride must be even and non-negative");
    }
    if (a.conv1_kernel < 1 || a.conv1_kernel % 2 == 0 || a.conv2_kernel < 1 || a.conv2_kernel % 2 == 0) {
        throw ConfigError("convolution kernels must be odd");
    }
}

void validate(const TrainConfig& cfg)
{
    if (!(cfg.lr >= 0)) throw ConfigError("train.lr must be non-negative");
    if (cfg.epochs < 1) throw ConfigError("train.epochs must be at least 1");
    if (cfg.batch_size < 1) throw ConfigError("train.batch_size must be at least 1");
    if (!(cfg.momentum >= 0 && cfg.momentum < 1)) throw ConfigError("train.momentum must lie in [0, 1)");
    if (!(cfg.validation_fraction >= 0 && cfg.validation_fraction < 1)) {
        throw ConfigError("train.validation_fraction must lie in [0, 1)");
    }
}

VectorXd Normalization::normalize_input(const MatrixXd& measurement) const
{
    const Map<const VectorXd> flat(measurement.data(), measurement.size());
    if (flat.size() != input_mean.size()) throw ShapeError("measurement size differs from normalization");
    return (flat - input_mean).cwiseQuotient(input_std);
}

MatrixXd Normalization::normalize_output(const MatrixXd& field) const
{
    if (field.rows() != cond_min.size()) throw ShapeError("field condition count differs from normalization");
    MatrixXd out(field.rows(), field.cols());
    for (Index c = 0; c < field.rows(); ++c) {
        const double span = cond_max[c] - cond_min[c];
        out.row(c) = ((field.row(c).array() - cond_min[c]) * (2.0 / span) - 1.0).matrix();
    }
    return out;
}

MatrixXd Normalization::denormalize_output(const MatrixXd& normalized) const
{
    if (normalized.rows() != cond_min.size()) throw ShapeError("field condition count differs from normalization");
    MatrixXd out(normalized.rows(), normalized.cols());
    for (Index c = 0; c < normalized.rows(); ++c) {
        const double span = cond_max[c] - cond_min[c];
        out.row(c) = (cond_min[c] + (normalized.row(c).array() + 1.0) * (0.5 * span)).matrix();
    }
    return out;
}

Normalization fit_normalization(std::span<const LabeledSample> samples)
{
    if (samples.empty()) throw DomainError("cannot fit normalization on an empty set");
    const Index in = samples[0].measurement.size();
    const Index ns = samples[0].truth.rows();
    Normalization n;
    n.input_mean = VectorXd::Zero(in);
    for (const auto& s : samples) n.input_mean += Map<const VectorXd>(s.measurement.data(), in);
    n.input_mean /= static_cast<double>(samples.size());
    VectorXd var = VectorXd::Zero(in);
    for (const auto& s : samples) {
        var += (Map<const VectorXd>(s.measurement.data(), in) - n.input_mean).array().square().matrix();
    }
    var /= static_cast<double>(samples.size());
    n.input_std = var.cwiseSqrt();
    for (Index k = 0; k < in; ++k) {
        if (!(n.input_std[k] > 0)) n.input_std[k] = 1.0;
    }

    n.cond_min = VectorXd::Constant(ns, std::numeric_limits<double>::infinity());
    n.cond_max = VectorXd::Constant(ns, -std::numeric_limits<double>::infinity());
    for (const auto& s : samples) {
        n.cond_min = n.cond_min.cwiseMin(s.truth.rowwise().minCoeff());
        n.cond_max = n.cond_max.cwiseMax(s.truth.rowwise().maxCoeff());
    }
    for (Index c = 0; c < ns; ++c) {
        if (!(n.cond_max[c] > n.cond_min[c])) {
            n.cond_min[c] -= 0.5;
            n.cond_max[c] += 0.5;
        }
    }
    return n;
}

EstimatorParams init_params(const NetworkArch& arch, const Normalization& norm, double init_scale,
                            std::uint64_t seed)
{
    validate(arch);
    check_norm(arch, norm);
    const Layout l(arch);
    EstimatorParams p;
    p.arch = arch;
    p.norm = norm;
    p.weights = VectorXd::Zero(l.total);

    std::mt19937_64 rng(seed);
    auto fill = [&](Index offset, Index count, double fan_in) {
        const double bound = init_scale / std::sqrt(fan_in);
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Index k = 0; k < count; ++k) p.weights[offset + k] = dist(rng);
    };
    fill(l.w0, l.b0 - l.w0, arch.input_size());
    if (!arch.fc_only) {
        const double taps_per_output = static_cast<double>(cube(arch.deconv_kernel)) / cube(arch.deconv_stride);
        fill(l.wd, l.bd - l.wd, arch.fc_channels * taps_per_output);
        fill(l.w1, l.b1 - l.w1, static_cast<double>(arch.deconv_channels) * cube(arch.conv1_kernel));
        fill(l.w2, l.b2 - l.w2, static_cast<double>(arch.conv1_channels) * cube(arch.conv2_kernel));
    }
    return p;
}

MatrixXd forward(const EstimatorParams& params, const MatrixXd& measurement)
{
    const auto& a = params.arch;
    if (measurement.rows() != a.input_rows || measurement.cols() != a.input_cols) {
        throw ShapeError("measurement shape does not match the network input");
    }
    check_norm(a, params.norm);
    const Network net(a);
    if (params.weights.size() != net.layout().total) throw ShapeError("weight vector size mismatch");
    Network::Cache cache;
    return params.norm.denormalize_output(net.run(params.weights, params.norm.normalize_input(measurement), cache));
}

double loss(const MatrixXd& estimate, const MatrixXd& truth)
{
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw ShapeError("estimate and truth shapes differ");
    }
    return (estimate - truth).squaredNorm();
}

namespace {

GradientResult backward_with(const Network& net, const EstimatorParams& params, std::span<const LabeledSample> batch,
                             bool want_gradient)
{
    if (batch.empty()) throw DomainError("batch is empty");
    GradientResult r;
    if (want_gradient) r.gradient = VectorXd::Zero(params.weights.size());
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    Network::Cache cache;
    for (const auto& s : batch) {
        check_sample(params.arch, s);
        const MatrixXd& y = net.run(params.weights, params.norm.normalize_input(s.measurement), cache);
        const MatrixXd diff = y - params.norm.normalize_output(s.truth);
        r.loss += diff.squaredNorm() * inv_b;
        if (want_gradient) net.back(params.weights, cache, (2.0 * inv_b) * diff, r.gradient);
    }
    return r;
}

} // namespace

GradientResult backward(const EstimatorParams& params, std::span<const LabeledSample> batch)
{
    check_norm(params.arch, params.norm);
    const Network net(params.arch);
    if (params.weights.size() != net.layout().total) throw ShapeError("weight vector size mismatch");
    return backward_with(net, params, batch, true);
}

double batch_loss(const EstimatorParams& params, std::span<const LabeledSample> batch)
{
    check_norm(params.arch, params.norm);
    const Network net(params.arch);
    return backward_with(net, params, batch, false).loss;
}

TrainResult train(const NetworkArch& arch, std::span<const LabeledSample> train_set, const TrainConfig& cfg)
{
    validate(arch);
    validate(cfg);
    if (train_set.empty()) throw DomainError("training set is empty");
    for (const auto& s : train_set) check_sample(arch, s);

    const std::size_t n = train_set.size();
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t n_val = n >= 2 ? static_cast<std::size_t>(std::llround(cfg.validation_fraction * n)) : 0;
    if (cfg.validation_fraction > 0 && n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    std::vector<LabeledSample> fit_part, val_part;
    for (std::size_t k = 0; k < n; ++k) {
        (k < n - n_val ? fit_part : val_part).push_back(train_set[order[k]]);
    }
    if (val_part.empty()) val_part = fit_part;

    const Network net(arch);
    TrainResult out;
    EstimatorParams params = init_params(arch, fit_normalization(fit_part), cfg.weight_init_scale,
                                         rng());
    out.train_loss.push_back(backward_with(net, params, fit_part, false).loss);
    out.val_loss.push_back(backward_with(net, params, val_part, false).loss);
    out.params = params;
    out.best_epoch = 0;
    double best_val = out.val_loss.back();

    VectorXd velocity = VectorXd::Zero(params.weights.size());
    std::vector<std::size_t> perm(fit_part.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<LabeledSample> batch;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        double running = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < perm.size(); start += bs) {
            const std::size_t stop = std::min(start + bs, perm.size());
            batch.clear();
            for (std::size_t k = start; k < stop; ++k) batch.push_back(fit_part[perm[k]]);
            GradientResult g = backward_with(net, params, batch, true);
            if (!std::isfinite(g.loss) || !g.gradient.allFinite()) {
                throw TrainingError("training diverged at epoch " + std::to_string(epoch), epoch);
            }
            if (cfg.momentum > 0) {
                velocity = cfg.momentum * velocity + g.gradient;
                params.weights -= cfg.lr * velocity;
            } else {
                params.weights -= cfg.lr * g.gradient;
            }
            running += g.loss;
            ++batches;
        }
        const double val = backward_with(net, params, val_part, false).loss;
        if (!std::isfinite(val)) throw TrainingError("validation loss not finite at epoch " + std::to_string(epoch), epoch);
        out.train_loss.push_back(running / static_cast<double>(batches));
        out.val_loss.push_back(val);
        if (val < best_val) {
            best_val = val;
            out.params = params;
            out.best_epoch = epoch;
        }
    }
    return out;
}

EvaluationReport evaluate_predictions(std::span<const MatrixXd> predictions, std::span<const LabeledSample> test_set,
                                      const Normalization& norm)
{
    if (predictions.size() != test_set.size()) throw ShapeError("prediction count differs from test set size");
    EvaluationReport r;
    r.samples = test_set.size();
    if (test_set.empty()) return r;
    const Index ns = test_set[0].truth.rows();
    const Index m = test_set[0].truth.cols();
    VectorXd sq = VectorXd::Zero(ns), ab = VectorXd::Zero(ns);
    MatrixXd cell_sq = MatrixXd::Zero(m, ns);
    double total_loss = 0;
    for (std::size_t k = 0; k < test_set.size(); ++k) {
        const MatrixXd& est = predictions[k];
        const MatrixXd& truth = test_set[k].truth;
        if (est.rows() != ns || est.cols() != m || truth.rows() != ns || truth.cols() != m) {
            throw ShapeError("prediction shape mismatch");
        }
        const MatrixXd diff = est - truth;
        sq += diff.array().square().matrix().rowwise().sum();
        ab += diff.cwiseAbs().rowwise().sum();
        cell_sq += diff.array().square().matrix().transpose();
        total_loss += loss(norm.normalize_output(est), norm.normalize_output(truth));
    }
    const double count = static_cast<double>(test_set.size());
    r.rmse = (sq / (count * static_cast<double>(m))).cwiseSqrt();
    r.mae = ab / (count * static_cast<double>(m));
    r.cell_rmse = (cell_sq / count).cwiseSqrt();
    r.mean_loss = total_loss / count;
    r.normalized_rmse = std::sqrt(r.mean_loss / static_cast<double>(ns * m));
    return r;
}

EvaluationReport evaluate(const EstimatorParams& params, std::span<const LabeledSample> test_set)
{
    check_norm(params.arch, params.norm);
    const Network net(params.arch);
    std::vector<MatrixXd> preds;
    preds.reserve(test_set.size());
    Network::Cache cache;
    for (const auto& s : test_set) {
        check_sample(params.arch, s);
        preds.push_back(
            params.norm.denormalize_output(net.run(params.weights, params.norm.normalize_input(s.measurement), cache)));
    }
    return evaluate_predictions(preds, test_set, params.norm);
}

MatrixXd constant_mean_predictor(std::span<const LabeledSample> train_set)
{
    if (train_set.empty()) throw DomainError("training set is empty");
    const Index ns = train_set[0].truth.rows();
    const Index m = train_set[0].truth.cols();
    VectorXd mean = VectorXd::Zero(ns);
    for (const auto& s : train_set) mean += s.truth.rowwise().mean();
    mean /= static_cast<double>(train_set.size());
    return mean.replicate(1, m);
}

} // namespace metaiot
