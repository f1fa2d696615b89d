#include "qngrc/qsvt.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "qngrc/errors.hpp"
#include "qngrc/linalg.hpp"
#include "qngrc/ngrc.hpp"

namespace qngrc {

namespace {

double clenshaw_odd(const std::vector<double>& c, int degree, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (int k = degree; k >= 1; --k) {
    double b0 = c[static_cast<std::size_t>(k)] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c[0] + x * b1 - b2;
}

struct GridCheck {
  double err = 0.0;
  double sup = 0.0;
};

GridCheck check_on_grid(const std::vector<double>& c, int degree, double kappa, int points) {
  GridCheck g;
  const double lo = 1.0 / kappa;
  for (int i = 0; i < points; ++i) {
    double x = points == 1 ? 1.0 : lo + (1.0 - lo) * static_cast<double>(i) / (points - 1);
    double p = clenshaw_odd(c, degree, x);
    g.err = std::max(g.err, std::abs(p - 1.0 / (2.0 * kappa * x)));
    g.sup = std::max(g.sup, std::abs(p));
  }
  return g;
}

// Chebyshev coefficients c_0..c_cap of g from Chebyshev–Gauss nodes via a mirrored FFT.
std::vector<double> chebyshev_coefficients(double kappa, double b, int cap) {
  const int N = 4 * (cap + 1);
  std::vector<double> y(static_cast<std::size_t>(2 * N));
  for (int i = 0; i < N; ++i) {
    const double x = std::cos(M_PI * (i + 0.5) / N);
    const double g = -std::expm1(b * std::log1p(-x * x)) / (2.0 * kappa * x);
    y[static_cast<std::size_t>(i)] = g;
    y[static_cast<std::size_t>(2 * N - 1 - i)] = g;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> Y;
  fft.fwd(Y, y);
  std::vector<double> c(static_cast<std::size_t>(cap + 1), 0.0);
  for (int j = 0; j <= cap; ++j) {
    if (j % 2 == 0) continue;  // g is odd
    c[static_cast<std::size_t>(j)] = (std::polar(1.0, -M_PI * j / (2.0 * N)) * Y[static_cast<std::size_t>(j)]).real() / N;
  }
  return c;
}

int next_odd(double v) {
  int n = static_cast<int>(std::ceil(v));
  return n % 2 ? n : n + 1;
}

Eigen::Index rank_of(const RealVector& s) { return linalg::numerical_rank(s, 1e-12); }

// Core of the inversion: polynomial on the block's singular values, no parameter checks.
BlockEncoding spectral_inverse(const BlockEncoding& be, double kappa_A, double normA, double delta) {
  const double kp = std::max(1.0, kappa_A * be.alpha / normA);
  const double eps_p = std::min(1.0, delta * be.alpha / 2.0);
  InversionPolynomial poly = build_inversion_polynomial(kp, eps_p);
  return transform_singular_values(be, poly);
}

}  // namespace

double InversionPolynomial::operator()(double x) const { return clenshaw_odd(coefficients, degree, x); }

std::pair<double, double> certify(const InversionPolynomial& poly, int points) {
  auto g = check_on_grid(poly.coefficients, poly.degree, poly.kappa, points);
  return {g.err, g.sup};
}

InversionPolynomial build_inversion_polynomial(double kappa, double eps) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be finite and >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("eps must lie in (0, 1]");
  InversionPolynomial poly;
  poly.kappa = kappa;
  poly.eps = eps;
  poly.smoothing = std::ceil(kappa * kappa * std::log(2.0 * kappa / eps));
  const int cap = next_odd(std::max(65.0, 8.0 * kappa * std::log(kappa / eps) + 1.0));
  if (cap > 2'000'000) throw ResourceLimit("inversion polynomial degree cap too large for kappa = " + std::to_string(kappa));
  poly.coefficients = chebyshev_coefficients(kappa, poly.smoothing, cap);

  const double target = eps / (2.0 * kappa);
  auto ok = [&](int n, GridCheck* out) {
    auto g = check_on_grid(poly.coefficients, n, kappa, kCertificationGrid);
    if (out) *out = g;
    return g.err <= target && g.sup <= 1.0;
  };
  // Geometric search for a passing odd degree, then bisection down to the smallest one.
  int lo = -1, hi = -1, n = 1;
  GridCheck last;
  while (n <= cap) {
    if (ok(n, &last)) {
      hi = n;
      break;
    }
    lo = n;
    n = std::min(next_odd(n * 1.25 + 2), n == cap ? cap + 2 : cap);
  }
  if (hi < 0) {
    std::ostringstream msg;
    msg << "inversion polynomial failed to reach error " << target << " by degree " << cap
        << "; achieved sup-error " << last.err << " (max |P| = " << last.sup << ")";
    throw NumericalFailure(msg.str());
  }
  while (hi - lo > 2) {
    int mid = lo + ((hi - lo) / 2);
    if (mid % 2 == 0) ++mid;
    if (mid >= hi) break;
    if (ok(mid, nullptr)) hi = mid;
    else lo = mid;
  }
  poly.degree = hi;
  poly.coefficients.resize(static_cast<std::size_t>(hi + 1));
  auto g = check_on_grid(poly.coefficients, hi, kappa, kCertificationGrid);
  poly.certified_error = g.err;
  poly.certified_sup = g.sup;
  return poly;
}

BlockEncoding transform_singular_values(const BlockEncoding& be_A, const InversionPolynomial& poly) {
  const Matrix B = be_A.block();
  Eigen::BDCSVD<Matrix> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double zero = 1e-12 * (s.size() ? s(0) : 0.0);
  const double lo = 1.0 / poly.kappa;
  RealVector p = RealVector::Zero(s.size());
  std::ostringstream bad;
  int n_bad = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= zero) continue;
    if (s(i) < lo * (1.0 - 1e-9) || s(i) > 1.0 + 1e-9) {
      if (n_bad++ < 8) bad << (n_bad > 1 ? ", " : "") << s(i);
      continue;
    }
    p(i) = poly(std::min(s(i), 1.0));
  }
  if (n_bad)
    throw DomainViolation(std::to_string(n_bad) + " singular value(s) outside [" + std::to_string(lo) +
                          ", 1]: " + bad.str());
  Matrix M = svd.matrixV() * p.asDiagonal() * svd.matrixU().adjoint();
  BlockEncoding out;
  out.unitary = dilation(M);
  out.realized_ancillas = 1;
  out.alpha = 2.0 * poly.kappa / be_A.alpha;
  out.n_ancilla = be_A.n_ancilla + 1;
  out.epsilon = poly.eps / be_A.alpha;
  out.block_rows = be_A.block_cols;
  out.block_cols = be_A.block_rows;
  out.cost = be_A.cost;
  return out;
}

std::pair<BlockEncoding, CostEstimate> pseudoinverse(const BlockEncoding& be_A, double kappa_A, double delta) {
  if (!(kappa_A >= 1.0)) throw InvalidArgument("kappa_A must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  const double normA = be_A.alpha * linalg::spectral_norm(be_A.block());
  if (!(normA > 0.0)) throw DegeneratePrediction("pseudoinverse of the zero matrix");
  const double bound = delta * normA / (2.0 * kappa_A * kappa_A);
  if (be_A.epsilon > bound)
    throw PreconditionViolated("pseudoinverse requires epsilon <= delta*||A||/(2 kappa_A^2) = " +
                               std::to_string(bound) + ", got " + std::to_string(be_A.epsilon));
  BlockEncoding out = spectral_inverse(be_A, kappa_A, normA, delta);
  out.alpha = 2.0 * kappa_A / normA;
  out.n_ancilla = be_A.n_ancilla + 1;
  out.epsilon = delta;

  CostEstimate c;
  c.formula_id = "pseudoinverse";
  c.expression = "O((kappa_A alpha/||A||) log(kappa_A/(delta ||A||)) T_A)";
  c.prefactor = (kappa_A * be_A.alpha / normA) * log_factor(kappa_A / (delta * normA));
  c.training_calls = c.prefactor * be_A.cost;
  c.scalars = {{"kappa_A", kappa_A}, {"alpha", be_A.alpha}, {"norm_A", normA}, {"delta", delta}};
  out.cost = c.training_calls;
  return {std::move(out), std::move(c)};
}

RegularizedInverse regularized_pseudoinverse(const BlockEncoding& be_X, double lambda, double delta) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  const Matrix Xr = be_X.alpha * be_X.block();
  const RealVector sx = linalg::singular_values(Xr);
  const Eigen::Index rx = rank_of(sx);
  if (rx == 0) throw IllConditioned("encoded feature matrix is numerically zero");
  RegularizedInverse r;
  r.norm_X = sx(0);
  r.kappa_X = sx(0) / sx(rx - 1);
  r.kappa = kappa_regularized(r.kappa_X, r.norm_X, lambda);
  const double sl = std::sqrt(lambda);

  const double lg = std::log(r.kappa / delta);
  const double bound = lg > 0.0 ? delta * (r.norm_X * r.norm_X + lambda) /
                                      (32.0 * (be_X.alpha + sl) * std::pow(r.kappa, 3) * lg * lg * lg)
                                : std::numeric_limits<double>::infinity();
  if (be_X.epsilon > bound)
    throw PreconditionViolated("regularized pseudoinverse requires epsilon_X <= delta*||XX^dagger + lambda I|| / "
                               "(32 (alpha + sqrt(lambda)) kappa^3 log^3(kappa/delta)) = " +
                               std::to_string(bound) + ", got " + std::to_string(be_X.epsilon));

  const BlockEncoding be_XI = augment_tikhonov(be_X, lambda);
  const Matrix XI = be_XI.alpha * be_XI.block();
  const RealVector si = linalg::singular_values(XI);
  const Eigen::Index ri = rank_of(si);
  const double kappa_I = si(0) / si(ri - 1);
  // Inverting every nonzero singular value of X_I makes the whole X_I⁺ accurate; the
  // null directions of padded rows carry √λ and only reach the lower-left block.
  const BlockEncoding inv = spectral_inverse(be_XI, kappa_I, si(0), delta / 2.0);
  const Eigen::Index n = be_X.system_dim();
  Matrix Z = Matrix::Zero(2 * n, 2 * n);
  Z.topLeftCorner(n, n) = inv.alpha * inv.block().topLeftCorner(n, n);

  const double alpha_out = 2.0 * r.kappa / (r.norm_X + sl);
  const double nz = linalg::spectral_norm(Z);
  if (nz > alpha_out * (1.0 + 1e-9))
    throw NumericalFailure("regularized inverse norm " + std::to_string(nz) + " exceeds its subnormalization " +
                           std::to_string(alpha_out));
  r.encoding.unitary = dilation(Z / std::max(alpha_out, nz));
  r.encoding.realized_ancillas = 1;
  r.encoding.alpha = alpha_out;
  r.encoding.n_ancilla = be_X.n_ancilla + 1;
  r.encoding.epsilon = delta;
  r.encoding.block_rows = 2 * n;
  r.encoding.block_cols = 2 * n;

  r.cost.formula_id = "regularized_pseudoinverse";
  r.cost.expression = "O((kappa alpha_X/(||X|| + sqrt(lambda))) log(kappa/delta) T_X)";
  r.cost.prefactor = (r.kappa * be_X.alpha / (r.norm_X + sl)) * log_factor(r.kappa / delta);
  r.cost.training_calls = r.cost.prefactor * be_X.cost;
  r.cost.scalars = {{"kappa", r.kappa},   {"kappa_X", r.kappa_X}, {"norm_X", r.norm_X},
                    {"lambda", lambda},   {"delta", delta},       {"alpha_X", be_X.alpha}};
  r.encoding.cost = r.cost.training_calls;
  return r;
}

WeightEncoding build_weight_encoding(const BlockEncoding& be_X, const BlockEncoding& be_Y, double lambda,
                                     double delta_W, const CircuitDims& dims, const WeightEncodingOptions& opts) {
  if (!(delta_W > 0.0 && delta_W <= 1.0)) throw InvalidArgument("delta_W must lie in (0, 1]");
  const int r = dims.r();
  const double sqrtT = std::sqrt(static_cast<double>(dims.T));
  if (be_X.n_ancilla != r || std::abs(be_X.alpha - sqrtT) > 1e-12 * sqrtT || be_X.epsilon != 0.0)
    throw PreconditionViolated("feature encoding must carry parameters (sqrt(T), max(2d+3,t), 0) = (" +
                               std::to_string(sqrtT) + ", " + std::to_string(r) + ", 0)");
  if (be_Y.n_ancilla != r + 1)
    throw PreconditionViolated("target encoding must carry max(2d+3,t)+1 = " + std::to_string(r + 1) + " ancillas");
  if (be_X.system_dim() != be_Y.system_dim()) throw DimensionMismatch("feature and target encodings differ in size");

  WeightEncoding we;
  const Matrix Xr = be_X.alpha * be_X.block();
  const RealVector sx = linalg::singular_values(Xr);
  const Eigen::Index rx = rank_of(sx);
  if (rx == 0) throw IllConditioned("encoded feature matrix is numerically zero");
  we.norm_X = sx(0);
  we.kappa_X = sx(0) / sx(rx - 1);
  we.kappa = kappa_regularized(we.kappa_X, we.norm_X, lambda);
  we.norm_Y = be_Y.alpha / std::sqrt(2.0);
  we.delta_Y = be_Y.epsilon;
  if (we.delta_Y > delta_W / (4.0 * we.kappa))
    throw PreconditionViolated("weight encoding requires delta_Y <= delta_W/(4 kappa) = " +
                               std::to_string(delta_W / (4.0 * we.kappa)) + ", got " + std::to_string(we.delta_Y));
  const double dx_max = delta_W / (2.0 * std::sqrt(2.0) * we.norm_Y);
  we.delta_X = opts.delta_X.value_or(dx_max);
  if (!(we.delta_X > 0.0) || we.delta_X > dx_max * (1.0 + 1e-12))
    throw PreconditionViolated("weight encoding requires 0 < delta_X <= delta_W/(2 sqrt(2) ||Y||) = " +
                               std::to_string(dx_max));

  RegularizedInverse inv = regularized_pseudoinverse(be_X, lambda, std::min(1.0, we.delta_X));
  const BlockEncoding Xp = top_left_view(inv.encoding, 1, be_X.block_cols, be_X.block_rows);
  we.encoding = multiply(be_Y, Xp);
  we.composed_error = we.encoding.epsilon;
  if (we.composed_error > delta_W * (1.0 + 1e-12))
    throw NumericalFailure("composed weight-encoding error " + std::to_string(we.composed_error) +
                           " exceeds delta_W");
  we.encoding.epsilon = delta_W;

  const double sl = std::sqrt(lambda);
  const double Tn = static_cast<double>(dims.T);
  we.cost.formula_id = "weight_encoding";
  we.cost.expression = "O((kappa/(||X|| + sqrt(lambda)) + 1/||Y||) log(kappa ||Y||/delta_W) T_O sqrt(T))";
  we.cost.prefactor = (we.kappa / (we.norm_X + sl) + 1.0 / we.norm_Y) * log_factor(we.kappa * we.norm_Y / delta_W) *
                      std::sqrt(Tn);
  we.cost.training_calls = we.cost.prefactor * be_X.cost;
  we.cost.scalars = {{"kappa", we.kappa}, {"norm_X", we.norm_X}, {"norm_Y", we.norm_Y}, {"lambda", lambda},
                     {"delta_W", delta_W}, {"T", Tn}, {"D", static_cast<double>(dims.D)}};
  we.cost_simplified = we.cost;
  we.cost_simplified.formula_id = "weight_encoding_simplified";
  we.cost_simplified.expression = "O(kappa T log(kappa D T/delta_W) T_O)";
  we.cost_simplified.prefactor = we.kappa * Tn * log_factor(we.kappa * static_cast<double>(dims.D) * Tn / delta_W);
  we.cost_simplified.training_calls = we.cost_simplified.prefactor * be_X.cost;
  we.encoding.cost = we.cost.training_calls;
  return we;
}

Matrix unscaled_weights(const WeightEncoding& we, Eigen::Index D, Eigen::Index L) {
  if (D > we.encoding.system_dim() || L > we.encoding.system_dim())
    throw DimensionMismatch("weight region exceeds the encoded block");
  return we.encoding.alpha * we.encoding.block().topLeftCorner(D, L);
}

}  // namespace qngrc
