#include <algorithm>
#include <optional>

#include "motcert/monotonicity.hpp"

namespace motcert {

namespace {

/// Reduced row echelon form of [m | t] over the rationals. Returns false when
/// the system is inconsistent.
struct AffineSystem {
  std::vector<std::size_t> pivot_cols;
  std::vector<std::size_t> free_cols;
  std::vector<Rational> rhs;                 // one per pivot row
  std::vector<std::vector<Rational>> coeff;  // pivot row x free col
};

std::optional<AffineSystem> reduce_system(std::vector<std::vector<Rational>> m,
                                          std::vector<Rational> t, std::size_t n_vars) {
  const std::size_t rows = m.size();
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_cols;
  for (std::size_t col = 0; col < n_vars && rank < rows; ++col) {
    std::size_t pr = rows;
    for (std::size_t r = rank; r < rows; ++r) {
      if (m[r][col] != 0) {
        pr = r;
        break;
      }
    }
    if (pr == rows) continue;
    std::swap(m[pr], m[rank]);
    std::swap(t[pr], t[rank]);
    Rational inv = Rational(1) / m[rank][col];
    for (auto& v : m[rank]) v *= inv;
    t[rank] *= inv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || m[r][col] == 0) continue;
      Rational f = m[r][col];
      for (std::size_t c = 0; c < n_vars; ++c) m[r][c] -= f * m[rank][c];
      t[r] -= f * t[rank];
    }
    pivot_cols.push_back(col);
    ++rank;
  }
  for (std::size_t r = rank; r < rows; ++r)
    if (t[r] != 0) return std::nullopt;

  AffineSystem sys;
  sys.pivot_cols = pivot_cols;
  std::vector<bool> is_pivot(n_vars, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  for (std::size_t c = 0; c < n_vars; ++c)
    if (!is_pivot[c]) sys.free_cols.push_back(c);
  sys.rhs.resize(rank);
  sys.coeff.assign(rank, std::vector<Rational>(sys.free_cols.size(), Rational(0)));
  for (std::size_t r = 0; r < rank; ++r) {
    sys.rhs[r] = t[r];
    for (std::size_t f = 0; f < sys.free_cols.size(); ++f) sys.coeff[r][f] = m[r][sys.free_cols[f]];
  }
  return sys;
}

void check_equal_marginals(const DiscreteCoupling& a, const DiscreteCoupling& b) {
  for (std::size_t k = 0; k < a.n_marginals(); ++k)
    if (!measures_equal(marginal(a, k), marginal(b, k)))
      throw validation_error("rationalize_pair: marginals differ");
}

DiscreteCoupling with_weights(const DiscreteCoupling& src, const std::vector<Rational>& w,
                              std::size_t offset) {
  std::vector<CouplingAtom> atoms;
  atoms.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i)
    atoms.push_back({src.atoms()[i].tuple, Weight::rational(w[offset + i])});
  return DiscreteCoupling(src.spaces(), WeightMode::rational, std::move(atoms));
}

}  // namespace

RationalizedPair rationalize_pair(const DiscreteCoupling& a, const DiscreteCoupling& b,
                                  const Rational& eps) {
  if (eps <= 0) throw validation_error("rationalize_pair: eps must be positive");
  if (a.mode() != b.mode()) throw mode_mismatch("rationalize_pair: inputs mix weight modes");
  if (a.spaces() != b.spaces()) throw validation_error("rationalize_pair: factor spaces differ");
  check_equal_marginals(a, b);

  if (a.mode() == WeightMode::rational) return {a, b};  // already in the rational solution set

  const std::size_t la = a.size(), lb = b.size();
  const std::size_t n_vars = la + lb;
  const std::size_t n = a.n_marginals();

  // Marginal-matching rows: per factor, per coincidence class of support
  // values, sum of a-weights minus sum of b-weights vanishes. Entries 1/0/-1.
  std::vector<std::vector<Rational>> m;
  std::vector<Rational> t;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Point> reps;
    std::vector<std::vector<std::size_t>> members;  // variable indices per class
    auto classify = [&](const Point& p, std::size_t var) {
      for (std::size_t g = 0; g < reps.size(); ++g) {
        if (points_equal(reps[g], p, WeightMode::floating)) {
          members[g].push_back(var);
          return;
        }
      }
      reps.push_back(p);
      members.push_back({var});
    };
    for (std::size_t i = 0; i < la; ++i) classify(a.atoms()[i].tuple[k], i);
    for (std::size_t j = 0; j < lb; ++j) classify(b.atoms()[j].tuple[k], la + j);
    for (const auto& cls : members) {
      std::vector<Rational> row(n_vars, Rational(0));
      for (auto var : cls) row[var] = var < la ? Rational(1) : Rational(-1);
      m.push_back(std::move(row));
      t.push_back(Rational(0));
    }
  }
  // Normalization: the a-block carries unit mass (the b-block inherits it
  // through the marginal rows).
  {
    std::vector<Rational> row(n_vars, Rational(0));
    for (std::size_t i = 0; i < la; ++i) row[i] = 1;
    m.push_back(std::move(row));
    t.push_back(Rational(1));
  }

  auto sys = reduce_system(std::move(m), std::move(t), n_vars);
  if (!sys)
    throw validation_error(
        "rationalize_pair: no exactly-equal-marginal weights exist on these supports");

  std::vector<Rational> target(n_vars);
  for (std::size_t i = 0; i < la; ++i) target[i] = rational_from_double(a.atoms()[i].weight.flt());
  for (std::size_t j = 0; j < lb; ++j)
    target[la + j] = rational_from_double(b.atoms()[j].weight.flt());

  // Rounding tolerance for the free coordinates, scaled down by how strongly
  // the pivot coordinates amplify them.
  Rational amp = 0;
  for (std::size_t r = 0; r < sys->rhs.size(); ++r) {
    Rational row_sum = 0;
    for (const auto& c : sys->coeff[r]) row_sum += c < 0 ? -c : c;
    amp = std::max(amp, row_sum);
  }
  Rational step = eps / (Rational(2) * (Rational(1) + amp));

  std::vector<Rational> w(n_vars);
  Rational worst_component = 0;
  const int max_rounds = sys->free_cols.empty() ? 1 : 200;
  for (int round = 0; round < max_rounds; ++round) {
    for (std::size_t f = 0; f < sys->free_cols.size(); ++f)
      w[sys->free_cols[f]] = cf_approx(target[sys->free_cols[f]], step);
    for (std::size_t r = 0; r < sys->pivot_cols.size(); ++r) {
      Rational v = sys->rhs[r];
      for (std::size_t f = 0; f < sys->free_cols.size(); ++f)
        v -= sys->coeff[r][f] * w[sys->free_cols[f]];
      w[sys->pivot_cols[r]] = v;
    }
    bool ok = true;
    worst_component = w[0];
    for (std::size_t i = 0; i < n_vars; ++i) {
      worst_component = std::min(worst_component, w[i]);
      Rational err = w[i] - target[i];
      if (err < 0) err = -err;
      if (!(w[i] > 0) || !(err < eps)) {
        ok = false;
        break;
      }
    }
    if (ok) return {with_weights(a, w, 0), with_weights(b, w, la)};
    step /= 4;
  }
  throw validation_error("rationalize_pair: eps too small to preserve positivity (margin " +
                         format_rational(worst_component) + ")");
}

}  // namespace motcert
