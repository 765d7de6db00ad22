#include "eeqt/model.hpp"

#include <algorithm>
#include <cmath>

#include "eeqt/errors.hpp"

namespace eeqt {

namespace {

constexpr double kHermitianTol = 1e-10;

bool exactly_zero(const ComplexMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != Complex(0.0, 0.0)) return false;
    return true;
}

double require_param(const std::map<std::string, double>& params, const std::string& key,
                     const char* model) {
    auto it = params.find(key);
    if (it == params.end())
        throw Error(std::string("builtin model '") + model + "' needs parameter '" + key + "'");
    return it->second;
}

}  // namespace

HybridModel HybridModel::build(int n, int m, std::vector<MatrixSchedule> hamiltonians,
                               std::vector<std::vector<MatrixSchedule>> couplings,
                               std::vector<std::string> labels) {
    if (n < 1) throw DimensionMismatch("model: quantum dimension must be >= 1");
    if (m < 1) throw DimensionMismatch("model: sector count must be >= 1");
    if (static_cast<int>(hamiltonians.size()) != m)
        throw DimensionMismatch("model: expected " + std::to_string(m) + " hamiltonians, got " +
                                std::to_string(hamiltonians.size()));
    if (static_cast<int>(couplings.size()) != m)
        throw DimensionMismatch("model: coupling array must have " + std::to_string(m) + " rows");
    for (int a = 0; a < m; ++a)
        if (static_cast<int>(couplings[a].size()) != m)
            throw DimensionMismatch("model: coupling row " + std::to_string(a + 1) +
                                    " must have " + std::to_string(m) + " entries");

    for (int a = 0; a < m; ++a) {
        const auto& sched = hamiltonians[a];
        for (std::size_t i = 0; i < sched.values().size(); ++i) {
            const auto& h = sched.values()[i];
            if (h.rows() != n || h.cols() != n)
                throw DimensionMismatch("model: H_" + std::to_string(a + 1) + " is " +
                                        std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                                        ", expected " + std::to_string(n) + "x" +
                                        std::to_string(n));
            if (!is_hermitian(h, kHermitianTol)) {
                const double t = sched.is_constant() ? 0.0 : sched.breakpoints()[i];
                throw NonHermitianHamiltonian(a + 1, t);
            }
        }
    }
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            const auto& sched = couplings[a][b];
            for (const auto& g : sched.values()) {
                if (g.rows() != n || g.cols() != n)
                    throw DimensionMismatch("model: g_" + std::to_string(a + 1) + "," +
                                            std::to_string(b + 1) + " is " +
                                            std::to_string(g.rows()) + "x" +
                                            std::to_string(g.cols()) + ", expected " +
                                            std::to_string(n) + "x" + std::to_string(n));
                if (a == b && !exactly_zero(g)) throw NonzeroDiagonalCoupling(a + 1);
            }
        }
    }
    if (!labels.empty() && static_cast<int>(labels.size()) != m)
        throw DimensionMismatch("model: expected " + std::to_string(m) + " labels");

    HybridModel model;
    model.n_ = n;
    model.m_ = m;
    model.hamiltonians_ = std::move(hamiltonians);
    model.couplings_ = std::move(couplings);
    model.labels_ = std::move(labels);
    return model;
}

const ComplexMatrix& HybridModel::hamiltonian(int alpha, double t) const {
    if (alpha < 0 || alpha >= m_)
        throw DimensionMismatch("hamiltonian: sector index out of range");
    return hamiltonians_[alpha].at(t);
}

const ComplexMatrix& HybridModel::coupling(int to_alpha, int from_alpha, double t) const {
    if (to_alpha < 0 || to_alpha >= m_ || from_alpha < 0 || from_alpha >= m_)
        throw DimensionMismatch("coupling: sector index out of range");
    return couplings_[to_alpha][from_alpha].at(t);
}

bool HybridModel::coupling_is_zero(int to_alpha, int from_alpha) const {
    const auto& sched = couplings_[to_alpha][from_alpha];
    return std::all_of(sched.values().begin(), sched.values().end(), exactly_zero);
}

ComplexMatrix HybridModel::lambda_operator(int alpha, double t) const {
    if (alpha < 0 || alpha >= m_)
        throw DimensionMismatch("lambda_operator: sector index out of range");
    ComplexMatrix lambda = ComplexMatrix::Zero(n_, n_);
    for (int b = 0; b < m_; ++b) {
        if (b == alpha) continue;
        const ComplexMatrix& g = coupling(b, alpha, t);  // jumps alpha -> b
        lambda.noalias() += g.adjoint() * g;
    }
    return lambda;
}

ComplexMatrix HybridModel::effective_generator(int alpha, double t) const {
    return Complex(0.0, -1.0) * hamiltonian(alpha, t) - 0.5 * lambda_operator(alpha, t);
}

double HybridModel::jump_rate(const ComplexVector& psi, int alpha, double t) const {
    if (psi.size() != n_) throw DimensionMismatch("jump_rate: psi has wrong dimension");
    if (std::abs(norm_sq(psi) - 1.0) > 1e-6)
        throw InvariantViolation("jump_rate: psi is not normalized");
    const double lambda = inner(psi, lambda_operator(alpha, t) * psi).real();
    if (lambda < -1e-12)
        throw InvariantViolation("jump_rate: negative rate " + std::to_string(lambda) +
                                 " signals a broken Lambda");
    return std::max(lambda, 0.0);
}

std::vector<double> HybridModel::jump_probabilities(const ComplexVector& psi, int alpha,
                                                    double t) const {
    if (psi.size() != n_) throw DimensionMismatch("jump_probabilities: psi has wrong dimension");
    std::vector<double> weights(m_, 0.0);
    double total = 0.0;
    for (int b = 0; b < m_; ++b) {
        if (b == alpha) continue;
        weights[b] = norm_sq(coupling(b, alpha, t) * psi);
        total += weights[b];
    }
    if (total <= 0.0)
        throw NoJumpPossible("jump_probabilities: total rate is zero in sector " +
                             std::to_string(alpha + 1));
    for (double& w : weights) w /= total;
    return weights;
}

std::vector<double> HybridModel::merged_breakpoints() const {
    std::vector<double> points;
    auto collect = [&points](const MatrixSchedule& s) {
        points.insert(points.end(), s.breakpoints().begin(), s.breakpoints().end());
    };
    for (const auto& h : hamiltonians_) collect(h);
    for (const auto& row : couplings_)
        for (const auto& g : row) collect(g);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

HybridModel HybridModel::with_transposed_couplings() const {
    std::vector<std::vector<MatrixSchedule>> transposed(m_, std::vector<MatrixSchedule>(m_));
    for (int a = 0; a < m_; ++a)
        for (int b = 0; b < m_; ++b) transposed[a][b] = couplings_[b][a];
    return build(n_, m_, hamiltonians_, std::move(transposed), labels_);
}

HybridModel builtin_model(const std::string& name, const std::map<std::string, double>& params) {
    const ComplexMatrix zero2 = ComplexMatrix::Zero(2, 2);
    ComplexMatrix sigma_x(2, 2);
    sigma_x << 0, 1, 1, 0;

    if (name == "qubit-detector" || name == "feedback-switch") {
        const double omega = require_param(params, "omega", name.c_str());
        const double kappa = require_param(params, "kappa", name.c_str());
        const double omega2 = name == "feedback-switch"
                                  ? require_param(params, "omega_prime", name.c_str())
                                  : omega;
        ComplexMatrix monitor = zero2;
        monitor(1, 1) = std::sqrt(kappa);  // sqrt(kappa) |1><1|
        std::vector<MatrixSchedule> h{MatrixSchedule(ComplexMatrix(0.5 * omega * sigma_x)),
                                      MatrixSchedule(ComplexMatrix(0.5 * omega2 * sigma_x))};
        std::vector<std::vector<MatrixSchedule>> g(2, std::vector<MatrixSchedule>(2, MatrixSchedule(zero2)));
        g[1][0] = MatrixSchedule(monitor);  // events 1 -> 2 only
        return HybridModel::build(2, 2, std::move(h), std::move(g), {"armed", "clicked"});
    }

    if (name == "n-level-counter") {
        const int n = static_cast<int>(require_param(params, "n", name.c_str()));
        const double kappa = require_param(params, "kappa", name.c_str());
        if (n < 1) throw Error("n-level-counter: n must be >= 1");
        const int m = n + 1;
        const ComplexMatrix zero_n = ComplexMatrix::Zero(n, n);
        std::vector<MatrixSchedule> h(m, MatrixSchedule(zero_n));
        std::vector<std::vector<MatrixSchedule>> g(m, std::vector<MatrixSchedule>(m, MatrixSchedule(zero_n)));
        std::vector<std::string> labels;
        for (int a = 0; a < n; ++a) {
            ComplexMatrix probe = zero_n;
            probe(a, a) = std::sqrt(kappa);  // sector a watches level a+1
            g[a + 1][a] = MatrixSchedule(probe);
        }
        for (int a = 0; a < m; ++a) labels.push_back("count=" + std::to_string(a));
        return HybridModel::build(n, m, std::move(h), std::move(g), std::move(labels));
    }

    throw Error("unknown builtin model '" + name + "'");
}

}  // namespace eeqt
