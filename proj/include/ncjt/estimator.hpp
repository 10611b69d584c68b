#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include "ncjt/error.hpp"

namespace ncjt {

// Cluster-sum LMMSE estimator for one pilot draw. With
// sigma_tilde^2 = sigma_w^2 + sigma_phi^2 - sigma_c^2 and a prior covariance
// (sigma_c^2 / n_a) I on the cluster channels, the estimate is
// h_hat = (reg I + P^H P)^-1 P^H y with reg = n_a sigma_tilde^2 / sigma_c^2.
template <typename Real>
struct BasicLmmseContext {
  using Complex = std::complex<Real>;
  using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  Real regularizer = 0;
  Real sigma_c_sq = 0;
  Real sigma_tilde_sq = 0;
  Matrix pilots;  // n_p x n_a; empty when built from the Gram matrix only
  Matrix pilot_gram;
  Eigen::LLT<Matrix> solve_factor;
  // Set when reg = 0 and the Gram matrix is singular (more cluster APs than
  // pilot symbols). The estimate then uses the pseudo-inverse, which lies
  // outside the model: any physical deployment has sigma_tilde^2 > 0.
  bool out_of_model = false;
  Matrix gram_pinv;

  Eigen::Index cluster_size() const { return pilot_gram.rows(); }
};

using LmmseContext = BasicLmmseContext<double>;

// `allow_pinv` permits the out-of-model pseudo-inverse when reg = 0; only
// build_context sets it, and only for more cluster APs than pilot symbols.
template <typename Real>
BasicLmmseContext<Real> build_context_from_gram(
    const typename BasicLmmseContext<Real>::Matrix& gram, Real sigma_c_sq, Real sigma_phi_sq,
    Real sigma_w_sq, bool allow_pinv = false) {
  using Ctx = BasicLmmseContext<Real>;
  if (!(sigma_c_sq > Real(0))) throw std::invalid_argument("build_context: sigma_c_sq must be positive");
  if (sigma_c_sq > sigma_phi_sq) throw std::invalid_argument("build_context: need sigma_c_sq <= sigma_phi_sq");
  if (sigma_w_sq < Real(0)) throw std::invalid_argument("build_context: negative noise variance");
  if (gram.rows() != gram.cols() || gram.rows() == 0)
    throw std::invalid_argument("build_context: Gram matrix must be square and non-empty");

  Ctx ctx;
  const auto n = gram.rows();
  ctx.sigma_c_sq = sigma_c_sq;
  ctx.sigma_tilde_sq = sigma_w_sq + (sigma_phi_sq - sigma_c_sq);
  ctx.regularizer = Real(n) * ctx.sigma_tilde_sq / sigma_c_sq;
  ctx.pilot_gram = gram;

  typename Ctx::Matrix m = gram;
  m.diagonal().array() += ctx.regularizer;
  ctx.solve_factor.compute(m);
  // A pivot this small relative to the largest diagonal entry means the
  // matrix is numerically singular even if the factorization went through.
  const Real scale = m.diagonal().real().maxCoeff();
  const Real floor = Real(n) * std::numeric_limits<Real>::epsilon() * scale;
  const auto pivots = ctx.solve_factor.matrixLLT().diagonal().real();
  const bool singular = ctx.solve_factor.info() != Eigen::Success || !(scale > Real(0)) ||
                        !((pivots.array() * pivots.array()).minCoeff() > floor);
  if (!singular) return ctx;

  if (ctx.regularizer == Real(0) && allow_pinv) {
    Eigen::SelfAdjointEigenSolver<typename Ctx::Matrix> eig(gram);
    const Real cut = Real(n) * std::numeric_limits<Real>::epsilon() *
                     std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), Real(1e-300));
    Eigen::Matrix<Real, Eigen::Dynamic, 1> inv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Real v = eig.eigenvalues()[i];
      inv[i] = v > cut ? Real(1) / v : Real(0);
    }
    ctx.gram_pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
    ctx.out_of_model = true;
    return ctx;
  }
  throw NumericalError("build_context: regularized pilot Gram matrix is not positive definite",
                       static_cast<double>(pivots.minCoeff()));
}

template <typename Real>
BasicLmmseContext<Real> build_context(const typename BasicLmmseContext<Real>::Matrix& pilots_cluster,
                                      Real sigma_c_sq, Real sigma_phi_sq, Real sigma_w_sq) {
  typename BasicLmmseContext<Real>::Matrix gram = pilots_cluster.adjoint() * pilots_cluster;
  auto ctx = build_context_from_gram<Real>(gram, sigma_c_sq, sigma_phi_sq, sigma_w_sq,
                                           pilots_cluster.rows() < pilots_cluster.cols());
  ctx.pilots = pilots_cluster;
  return ctx;
}

inline LmmseContext build_context(const Eigen::MatrixXcd& pilots_cluster, double sigma_c_sq,
                                  double sigma_phi_sq, double sigma_w_sq) {
  return build_context<double>(pilots_cluster, sigma_c_sq, sigma_phi_sq, sigma_w_sq);
}

template <typename Real>
struct BasicEstimate {
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> h_hat;
  std::complex<Real> sum_estimate;
};

using Estimate = BasicEstimate<double>;

// Estimate from the matched-filter output P^H y.
template <typename Real>
BasicEstimate<Real> estimate_from_correlation(const BasicLmmseContext<Real>& ctx,
                                              const typename BasicLmmseContext<Real>::Vector& correlation) {
  if (correlation.size() != ctx.cluster_size())
    throw std::invalid_argument("estimate: correlation length differs from the cluster size");
  BasicEstimate<Real> e;
  e.h_hat = ctx.out_of_model ? (ctx.gram_pinv * correlation).eval() : ctx.solve_factor.solve(correlation);
  e.sum_estimate = e.h_hat.sum();
  return e;
}

template <typename Real>
BasicEstimate<Real> estimate(const BasicLmmseContext<Real>& ctx,
                             const typename BasicLmmseContext<Real>::Vector& y_p) {
  if (ctx.pilots.size() == 0) throw std::logic_error("estimate: context was built without pilots");
  if (y_p.size() != ctx.pilots.rows())
    throw std::invalid_argument("estimate: received training length differs from n_p");
  return estimate_from_correlation(ctx, (ctx.pilots.adjoint() * y_p).eval());
}

// 1^T (n_a / sigma_c^2 I + P^H P / sigma_tilde^2)^-1 1, the error variance of
// the cluster-sum estimate conditioned on the pilots.
template <typename Real>
Real exact_error_variance(const BasicLmmseContext<Real>& ctx) {
  using Vector = typename BasicLmmseContext<Real>::Vector;
  const auto n = ctx.cluster_size();
  const Vector ones = Vector::Ones(n);
  if (ctx.out_of_model) {
    // sigma_tilde -> 0: only the null space of P keeps its prior variance.
    const Vector leak = ones - ctx.gram_pinv * (ctx.pilot_gram * ones);
    return std::max(Real(0), (ctx.sigma_c_sq / Real(n)) * ones.dot(leak).real());
  }
  return std::max(Real(0), ctx.sigma_tilde_sq * ones.dot(ctx.solve_factor.solve(ones)).real());
}

}  // namespace ncjt
