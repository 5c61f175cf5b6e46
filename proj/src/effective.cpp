#include "hexedge/effective.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hexedge {

DiracModel dirac_model(const DiracPointCertificate& cert, double theta, const EdgeFrame& frame,
                       const DomainWall& wall) {
  DiracModel m;
  m.c = cert.lambda_sharp * frame.K2.norm();
  m.theta = theta;
  m.wall = wall;
  if (!(m.c > 0)) throw std::invalid_argument("Dirac velocity must be positive");
  return m;
}

double DiracZeroModeAnalytic::amplitude(double z) const {
  // log cosh without overflow
  double az = std::abs(z);
  double lc = az + std::log1p(std::exp(-2 * az)) - std::log(2.0);
  return std::exp(-p * lc) / norm;
}

Eigen::Vector2cd DiracZeroModeAnalytic::operator()(double z) const {
  double f = amplitude(z) / std::sqrt(2.0);
  return {cplx(f, 0), cplx(0, -sign * f)};
}

DiracZeroModeAnalytic dirac_zero_mode_analytic(const DiracModel& m) {
  if (m.wall.kind != WallKind::Tanh) throw std::invalid_argument("closed form only for the tanh wall");
  if (m.theta == 0) throw std::invalid_argument("theta must be nonzero");
  DiracZeroModeAnalytic a;
  a.p = std::abs(m.theta) * m.wall.kappa_inf / m.c;
  a.sign = (m.theta * m.wall.kappa_inf > 0) ? 1 : -1;
  // int sech^(2p) = sqrt(pi) Gamma(p) / Gamma(p + 1/2)
  a.norm = std::sqrt(std::exp(0.5 * std::log(kPi) + std::lgamma(a.p) - std::lgamma(a.p + 0.5)));
  return a;
}

double dirac_residual(const DiracModel& m, const std::vector<Eigen::Vector2cd>& al, double z0, double h) {
  const cplx I(0, 1);
  double r = 0;
  for (size_t j = 2; j + 2 < al.size(); ++j) {
    Eigen::Vector2cd d = (-al[j + 2] + 8.0 * al[j + 1] - 8.0 * al[j - 1] + al[j - 2]) / (12 * h);
    double k = m.wall(z0 + j * h);
    cplx top = -I * m.c * d(0) + m.theta * k * al[j](1);
    cplx bot = I * m.c * d(1) + m.theta * k * al[j](0);
    r = std::max({r, std::abs(top), std::abs(bot)});
  }
  return r;
}

DiracZeroMode dirac_zero_mode_numeric(const DiracModel& m, double L, int n) {
  if (m.theta == 0) throw std::invalid_argument("theta must be nonzero");
  if (L < 20 * m.c / std::abs(m.theta)) throw std::invalid_argument("domain too short for the decay length");
  if (n < 16) throw std::invalid_argument("grid too coarse");
  // nodes zeta_j = -L + j h (j = 0..n, f_n = 0); B rows sit at midpoints.
  // work with |theta| kappa_inf > 0, i.e. the zero mode lives in the e- component; flip with sigma3 otherwise
  const double h = 2 * L / n;
  const double th = std::abs(m.theta);
  const int s = (m.theta * m.wall.kappa_inf > 0) ? 1 : -1;
  const double ks = m.wall.kappa_inf > 0 ? 1 : -1;
  std::vector<double> zm(n), d(n), e(n - 1);
  for (int j = 0; j < n; ++j) {
    zm[j] = -L + (j + 0.5) * h;
    double k = ks * m.wall(zm[j]);
    d[j] = -m.c / h - 0.5 * th * k;
    if (j + 1 < n) e[j] = m.c / h - 0.5 * th * k;
  }
  // Golub-Kahan form: zero diagonal, off-diagonal d0, e0, d1, e1, ..., d_{n-1}
  std::vector<double> T(2 * n, 0.0), off(2 * n - 1);
  for (int j = 0; j < n; ++j) {
    off[2 * j] = d[j];
    if (j + 1 < n) off[2 * j + 1] = e[j];
  }
  auto ep = tridiagonal_eigen_index(T, off, n, n + 2, true);
  DiracZeroMode z;
  z.energy = std::abs(ep.values(0));
  z.next = std::abs(ep.values(1));
  z.separated = z.next > 10 * z.energy;
  z.zeta = zm;
  z.alpha.resize(n);
  // odd entries of the eigenvector carry u (left singular vector, midpoints)
  double nrm = 0;
  for (int j = 0; j < n; ++j) nrm += ep.vectors(2 * j + 1, 0) * ep.vectors(2 * j + 1, 0);
  nrm = std::sqrt(nrm * h);
  const double r2 = 1 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    double u = ep.vectors(2 * j + 1, 0) / nrm;
    z.alpha[j] = Eigen::Vector2cd(cplx(u * r2, 0), cplx(0, -s * u * r2));
  }
  // sign convention: positive at the centre
  size_t jm = 0;
  for (size_t j = 0; j < z.alpha.size(); ++j)
    if (std::abs(z.alpha[j](0)) > std::abs(z.alpha[jm](0))) jm = j;
  if (z.alpha[jm](0).real() < 0)
    for (auto& a : z.alpha) a = -a;
  return z;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("profiles differ in length");
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

DeflatedResolvent::DeflatedResolvent(const MatrixXc& H, double E, const VectorXc& phi, double next_gap)
    : H_(H), E_(E), phi_(phi) {
  if (next_gap < 1e-6) throw std::runtime_error("resolvent ill-conditioned");
  const int n = static_cast<int>(H.rows());
  MatrixXc A = MatrixXc::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = H - E * MatrixXc::Identity(n, n);
  A.block(0, n, n, 1) = phi;
  A.block(n, 0, 1, n) = phi.adjoint();
  lu_.compute(A);
}

VectorXc DeflatedResolvent::apply(const VectorXc& f) const {
  const int n = static_cast<int>(H_.rows());
  VectorXc rhs = VectorXc::Zero(n + 1);
  rhs.head(n) = f - phi_ * phi_.dot(f);
  VectorXc x = lu_.solve(rhs);
  VectorXc u = x.head(n);
  // one step of refinement on the projected equation
  VectorXc r = VectorXc::Zero(n + 1);
  r.head(n) = rhs.head(n) - (H_ * u - E_ * u) - phi_ * x(n);
  r(n) = -phi_.dot(u);
  u += lu_.solve(r).head(n);
  return u;
}

double DeflatedResolvent::residual(const VectorXc& f, const VectorXc& u) const {
  VectorXc pf = f - phi_ * phi_.dot(f);
  return (H_ * u - E_ * u - pf).norm();
}

BandEdge lowest_band_edge(double eps, const FourierPotential& V, const Vec2& Kstar, int N) {
  if (N < V.max_index() + 1) throw std::invalid_argument("cutoff too small for potential");
  BandEdge b;
  b.Kstar = Kstar;
  b.eps = eps;
  b.basis = PlaneWaveBasis::disk(Kstar, N);
  b.H = assemble_matrix(Kstar, b.basis, {{eps, &V}});
  auto ep = eigensolve(b.H, 2);
  b.E = ep.values(0);
  b.E2 = ep.values(1);
  if (b.E2 - b.E < 1e-6) throw std::runtime_error("lowest band is degenerate at this quasimomentum");
  b.phi = fix_phase(ep.vectors.col(0));
  return b;
}

VectorXc resolvent_apply(const BandEdge& edge, const VectorXc& f) {
  DeflatedResolvent R(edge.H, edge.E, edge.phi, edge.E2 - edge.E);
  return R.apply(f);
}

double SchrodingerModel::Q(double z) const {
  double k = wall(z);
  return a * wall.deriv(z) + b * (wall.kappa_inf * wall.kappa_inf - k * k);
}

SchrodingerModel schrodinger_coefficients(double eps, const FourierPotential& V, const FourierPotential& W,
                                          const Vec2& Kstar, const EdgeFrame& frame, int N) {
  BandEdge be = lowest_band_edge(eps, V, Kstar, N);
  DeflatedResolvent R(be.H, be.E, be.phi, be.E2 - be.E);
  const auto& B = be.basis;
  const Vec2 K2 = frame.K2;
  const int n = B.dim();
  const VectorXc& phi = be.phi;

  VectorXc dphi(n);  // K2 . grad Phi
  Eigen::Vector2cd inner_grad = Eigen::Vector2cd::Zero();
  for (int i = 0; i < n; ++i) {
    Vec2 p = Kstar + B.vec(i);
    dphi(i) = cplx(0, 1) * K2.dot(p) * phi(i);
    inner_grad += std::norm(phi(i)) * cplx(0, 1) * Eigen::Vector2cd(p.x(), p.y());
  }
  MatrixXc Wm = field_matrix(B, W);
  VectorXc wphi = Wm * phi;

  SchrodingerModel m;
  m.eps = eps;
  m.frame = frame;
  m.Kstar = Kstar;
  m.E = be.E;
  m.inner_W = std::abs(phi.dot(wphi));
  m.inner_grad = inner_grad.norm();
  if (m.inner_W > 1e-9 || m.inner_grad > 1e-9)
    throw std::runtime_error("first-order solvability identities fail at this band edge");

  VectorXc rw = R.apply(wphi);
  VectorXc rd = R.apply(dphi);
  cplx a = -2.0 * dphi.dot(rw);
  m.a = a.real();
  m.a_imag = a.imag();
  if (std::abs(m.a_imag) > 1e-10) throw std::runtime_error("coefficient a has a non-negligible imaginary part");
  cplx b = wphi.dot(rw);
  m.b = b.real();
  if (!W.empty() && !(m.b > 0)) throw std::runtime_error("coefficient b is not positive");
  m.half_inv_mass = K2.squaredNorm() - 4 * dphi.dot(rd).real();

  // (1/2) d^2/dlambda^2 E(K* + lambda K2): central differences at h and h/2, Richardson combined
  auto e0 = [&](double l) {
    MatrixXc H = assemble_matrix(Kstar + l * K2, B, {{eps, &V}});
    return hermitian_eigen<cplx>(H, 0, 1, false).values(0);
  };
  const double h = 1e-3;
  auto half_second = [&](double s) { return 0.5 * (e0(s) - 2 * be.E + e0(-s)) / (s * s); };
  double s1 = half_second(h), s2 = half_second(h / 2);
  m.half_inv_mass_fd = (4 * s2 - s1) / 3;
  return m;
}

static HeffResult solve_heff_once(const SchrodingerModel& m, double L, int n, std::vector<double>* err_ref) {
  const double h = 2 * L / n;
  const double t = m.half_inv_mass;
  const int ni = n - 1;  // interior nodes
  std::vector<double> d(ni), e(ni - 1, -t / (h * h));
  double qmin = INFINITY, qmax = -INFINITY;
  for (int j = 0; j < ni; ++j) {
    double q = m.Q(-L + (j + 1) * h);
    d[j] = 2 * t / (h * h) + q;
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  }
  // essential spectrum [0, inf) for t > 0 and (-inf, 0] for t < 0
  double vl = t < 0 ? 0.0 : std::min(qmin, 0.0) - 1;
  double vu = t < 0 ? std::max(qmax, 0.0) + 1 : 0.0;
  auto ep = tridiagonal_eigen_window(d, e, vl, vu, true);
  HeffResult r;
  r.L = L;
  r.h = h;
  for (int k = 0; k < ep.values.size(); ++k) {
    double mu = ep.values(k);
    if (mu == 0) continue;
    double tot = 0, tail = 0;
    for (int j = 0; j < ni; ++j) {
      double z = -L + (j + 1) * h;
      double w = ep.vectors(j, k) * ep.vectors(j, k);
      tot += w;
      if (std::abs(z) > L / 2) tail += w;
    }
    HeffState s;
    s.mu = mu;
    s.tail_mass = tail / tot;
    if (s.tail_mass >= 1e-4) continue;
    double sg = 0;
    s.zeta.resize(ni);
    s.A0.resize(ni);
    for (int j = 0; j < ni; ++j) {
      s.zeta[j] = -L + (j + 1) * h;
      s.A0[j] = ep.vectors(j, k) / std::sqrt(tot * h);
      if (std::abs(s.A0[j]) > std::abs(sg)) sg = s.A0[j];
    }
    if (sg < 0)
      for (auto& v : s.A0) v = -v;
    r.states.push_back(std::move(s));
  }
  std::sort(r.states.begin(), r.states.end(), [t](const HeffState& x, const HeffState& y) {
    return t < 0 ? x.mu > y.mu : x.mu < y.mu;
  });
  if (err_ref) {
    err_ref->clear();
    for (const auto& s : r.states) err_ref->push_back(s.mu);
  }
  return r;
}

HeffResult solve_heff(const SchrodingerModel& m, double L, int n) {
  if (L < 40 || n < 2000) throw std::invalid_argument("solve_heff needs L >= 40 and n >= 2000");
  if (m.half_inv_mass == 0) throw std::invalid_argument("effective mass is infinite");
  std::vector<double> coarse;
  solve_heff_once(m, L, n, &coarse);
  HeffResult fine = solve_heff_once(m, L, 2 * n, nullptr);
  HeffResult out;
  out.L = L;
  out.h = fine.h;
  // pair each fine-grid state with the nearest coarse one; keep those separated from 0 by 10x the change
  for (auto& s : fine.states) {
    double best = INFINITY;
    for (double c : coarse) best = std::min(best, std::abs(c - s.mu));
    s.error = best;
    if (std::abs(s.mu) > 10 * s.error) out.states.push_back(std::move(s));
  }
  return out;
}

HeffResult solve_heff_adaptive(const SchrodingerModel& m, double h, double L0, double Lmax) {
  HeffResult prev;
  bool have = false;
  for (double L = L0; L <= Lmax * (1 + 1e-12); L *= 2) {
    int n = std::max(2000, static_cast<int>(std::lround(2 * L / h)));
    HeffResult r = solve_heff(m, L, n);
    if (have && !r.states.empty() && r.states.size() == prev.states.size()) {
      bool same = true;
      for (size_t i = 0; i < r.states.size(); ++i)
        same = same && std::abs(r.states[i].mu - prev.states[i].mu) <= 1e-6 * std::max(1.0, std::abs(r.states[i].mu)) &&
               r.states[i].tail_mass < 1e-8;
      if (same) return r;
    }
    prev = std::move(r);
    have = true;
  }
  return prev;
}

double predict_edge_energy(const SchrodingerModel& m, double mu, double delta) {
  return m.E + delta * delta * (mu - m.b * m.wall.kappa_inf * m.wall.kappa_inf);
}

HomotopyResult homotopy_threshold(SchrodingerModel m, double A, double w, double tol) {
  const double kinf = m.wall.kappa_inf;
  auto bound = [&](double th) {
    m.wall = DomainWall::tanh_plus_bump(th * A, w, kinf);
    return !solve_heff_adaptive(m).states.empty();
  };
  HomotopyResult r;
  if (!bound(0) || bound(1)) return r;
  r.found = true;
  while (r.theta_hi - r.theta_lo > tol) {
    double mid = 0.5 * (r.theta_lo + r.theta_hi);
    (bound(mid) ? r.theta_lo : r.theta_hi) = mid;
  }
  return r;
}

nlohmann::json schrodinger_json(const SchrodingerModel& m, const HeffResult& r) {
  nlohmann::json j;
  j["eps"] = m.eps;
  j["edge"] = {m.frame.a1, m.frame.b1};
  j["K_star"] = {m.Kstar.x(), m.Kstar.y()};
  j["E_tilde_star"] = m.E;
  j["a"] = m.a;
  j["a_imag"] = m.a_imag;
  j["b"] = m.b;
  j["half_inv_mass"] = m.half_inv_mass;
  j["half_inv_mass_fd"] = m.half_inv_mass_fd;
  j["m_eff_inv"] = m.m_eff_inv();
  j["inner_W"] = m.inner_W;
  j["inner_grad"] = m.inner_grad;
  j["wall"] = m.wall.to_text();
  j["L"] = r.L;
  j["h"] = r.h;
  nlohmann::json mus = nlohmann::json::array();
  for (const auto& s : r.states) mus.push_back({{"mu_eff", s.mu}, {"error", s.error}, {"tail_mass", s.tail_mass}});
  j["mu_eff"] = mus;
  return j;
}

nlohmann::json dirac_model_json(const DiracModel& m, const DiracZeroMode& z) {
  nlohmann::json j;
  j["c"] = m.c;
  j["theta"] = m.theta;
  j["wall"] = m.wall.to_text();
  j["E0"] = z.energy;
  j["next"] = z.next;
  j["separated"] = z.separated;
  return j;
}

void write_heff_csv(std::ostream& os, const SchrodingerModel& m, const HeffResult& r) {
  os << "zeta,Q_eff";
  for (size_t k = 0; k < r.states.size(); ++k) os << ",A0_" << k;
  os << '\n';
  if (r.states.empty()) {
    const int n = 2000;
    for (int j = 0; j <= n; ++j) {
      double z = -r.L + 2 * r.L * j / n;
      os << fmt12(z) << ',' << fmt12(m.Q(z)) << '\n';
    }
    return;
  }
  const auto& z = r.states[0].zeta;
  for (size_t j = 0; j < z.size(); ++j) {
    os << fmt12(z[j]) << ',' << fmt12(m.Q(z[j]));
    for (const auto& s : r.states) os << ',' << fmt12(s.A0[j]);
    os << '\n';
  }
}

}  // namespace hexedge
