#pragma once

// Block Lanczos with full reorthogonalization for the extreme eigenvalues of
// a symmetric operator given only as a block matvec.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>

namespace fermipair {

struct LanczosOptions {
  int block = 4;
  int max_steps = 400;
  int min_steps = 20;
  int check_every = 10;
  double tolerance = 1e-11;  ///< change of a wanted Ritz value between checks
  std::uint64_t seed = 0;
  bool want_vectors = false;
};

struct LanczosResult {
  Eigen::VectorXd values;   ///< wanted Ritz values, ascending
  Eigen::MatrixXd vectors;  ///< matching Ritz vectors, if requested
  int steps = 0;
  bool converged = false;
};

using BlockMatvec = std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&)>;

namespace detail {

inline void orthogonalize_against(const Eigen::MatrixXd& basis, Eigen::Index used,
                                  Eigen::MatrixXd& w) {
  if (used == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd c = basis.leftCols(used).transpose() * w;
    w.noalias() -= basis.leftCols(used) * c;
  }
}

/// Thin QR of w into q (orthonormal) and r. Columns that collapse are
/// replaced by fresh random directions orthogonal to the basis.
inline void block_qr(Eigen::MatrixXd& w, Eigen::MatrixXd& q, Eigen::MatrixXd& r,
                     const Eigen::MatrixXd& basis, Eigen::Index used, std::mt19937_64& rng) {
  const Eigen::Index b = w.cols();
  q = w;
  r = Eigen::MatrixXd::Zero(b, b);
  std::normal_distribution<double> normal;
  const double scale = std::max(1.0, w.norm());
  for (Eigen::Index j = 0; j < b; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = q.col(i).dot(q.col(j));
        if (pass == 0) r(i, j) = c; else r(i, j) += c;
        q.col(j) -= c * q.col(i);
      }
    double nrm = q.col(j).norm();
    if (nrm <= 1e-12 * scale) {
      r(j, j) = 0.0;
      for (Eigen::Index t = 0; t < q.rows(); ++t) q(t, j) = normal(rng);
      Eigen::MatrixXd col = q.col(j);
      orthogonalize_against(basis, used, col);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < j; ++i) col.col(0) -= q.col(i).dot(col.col(0)) * q.col(i);
      q.col(j) = col.col(0) / col.norm();
    } else {
      r(j, j) = nrm;
      q.col(j) /= nrm;
    }
  }
}

}  // namespace detail

/// Ritz pairs for which wanted(value) holds. The iteration stops once the
/// set of wanted Ritz values is stable between two checks.
inline LanczosResult block_lanczos(Eigen::Index dim, const BlockMatvec& apply,
                                   const std::function<bool(double)>& wanted,
                                   const LanczosOptions& opts = {}) {
  const Eigen::Index b = std::min<Eigen::Index>(opts.block, dim);
  const Eigen::Index cap =
      std::min<Eigen::Index>(dim, static_cast<Eigen::Index>(opts.max_steps) * b);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;

  Eigen::MatrixXd basis(dim, cap);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(cap, cap);

  Eigen::MatrixXd w(dim, b), q, r, aq(dim, b);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < b; ++j) w(i, j) = normal(rng);
  detail::block_qr(w, q, r, basis, 0, rng);

  Eigen::Index used = 0;
  Eigen::VectorXd previous;
  LanczosResult out;
  auto wanted_values = [&](const Eigen::VectorXd& ev) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (wanted(ev(i))) v.push_back(ev(i));
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };

  int step = 0;
  while (used + b <= cap) {
    basis.middleCols(used, b) = q;
    apply(q, aq);
    const Eigen::MatrixXd diag = q.transpose() * aq;
    t.block(used, used, b, b) = 0.5 * (diag + diag.transpose());
    used += b;
    ++step;

    w = aq;
    detail::orthogonalize_against(basis, used, w);

    const bool exhausted = used + b > cap;
    if (exhausted || (step >= opts.min_steps && step % opts.check_every == 0)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(used, used),
                                                        Eigen::EigenvaluesOnly);
      const Eigen::VectorXd current = wanted_values(es.eigenvalues());
      const bool stable = previous.size() == current.size() && current.size() > 0 &&
                          (current - previous).cwiseAbs().maxCoeff() <=
                              opts.tolerance * std::max(1.0, current.cwiseAbs().maxCoeff());
      const bool none_wanted = previous.size() == 0 && current.size() == 0 && step >= 2 * opts.min_steps;
      previous = current;
      if (stable || none_wanted || used == dim) {
        out.converged = true;
        break;
      }
      if (exhausted) break;
    }

    detail::block_qr(w, q, r, basis, used, rng);
    t.block(used, used - b, b, b) = r;
    t.block(used - b, used, b, b) = r.transpose();
  }

  out.steps = step;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      t.topLeftCorner(used, used),
      opts.want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (wanted(ev(i))) keep.push_back(i);
  out.values.resize(static_cast<Eigen::Index>(keep.size()));
  if (opts.want_vectors) out.vectors.resize(dim, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.values(ii) = ev(keep[i]);
    if (opts.want_vectors)
      out.vectors.col(ii) = basis.leftCols(used) * es.eigenvectors().col(keep[i]);
  }
  return out;
}

}  // namespace fermipair
