#include "motcert/measures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace motcert {

bool points_equal(const Point& a, const Point& b, WeightMode mode) {
  if (a.dim() != b.dim()) return false;
  if (mode == WeightMode::rational) return a.coords == b.coords;
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (std::abs(a.coords[i] - b.coords[i]) > kFloatPointTol) return false;
  return true;
}

double factor_distance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) throw validation_error("factor_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double d = a.coords[i] - b.coords[i];
    s += d * d;
  }
  return std::sqrt(s);
}

FactorSpace::FactorSpace(std::size_t d, std::vector<std::array<double, 2>> b)
    : dim(d), bounds(std::move(b)) {
  if (dim == 0) throw validation_error("FactorSpace: dimension must be positive");
  if (bounds.size() != dim) throw validation_error("FactorSpace: bounds count != dim");
  for (const auto& [lo, hi] : bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw validation_error("FactorSpace: non-finite bound");
    if (!(lo < hi)) throw validation_error("FactorSpace: requires lower < upper per axis");
  }
}

bool FactorSpace::contains(const Point& p) const {
  if (p.dim() != dim) return false;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!std::isfinite(p.coords[i])) return false;
    if (p.coords[i] < bounds[i][0] || p.coords[i] > bounds[i][1]) return false;
  }
  return true;
}

double FactorSpace::diameter() const {
  double s = 0.0;
  for (const auto& [lo, hi] : bounds) s += (hi - lo) * (hi - lo);
  return std::sqrt(s);
}

const Rational& Weight::rat() const {
  if (mode_ != WeightMode::rational) throw mode_mismatch("Weight: not in rational mode");
  return rat_;
}

double Weight::flt() const {
  if (mode_ != WeightMode::floating) throw mode_mismatch("Weight: not in floating mode");
  return flt_;
}

bool Weight::is_positive() const {
  return mode_ == WeightMode::rational ? rat_ > 0 : flt_ > 0.0;
}

bool Weight::is_integer() const {
  if (mode_ == WeightMode::rational) return denominator(rat_) == 1;
  return std::isfinite(flt_) && flt_ == std::floor(flt_);
}

Weight& Weight::operator+=(const Weight& o) {
  if (mode_ != o.mode_) throw mode_mismatch("Weight: mixed-mode addition");
  if (mode_ == WeightMode::rational)
    rat_ += o.rat_;
  else
    flt_ += o.flt_;
  return *this;
}

Weight operator*(const Weight& a, const Weight& b) {
  if (a.mode_ != b.mode_) throw mode_mismatch("Weight: mixed-mode multiplication");
  if (a.mode_ == WeightMode::rational) return Weight::rational(a.rat_ * b.rat_);
  return Weight::floating(a.flt_ * b.flt_);
}

Weight operator/(const Weight& a, const Weight& b) {
  if (a.mode_ != b.mode_) throw mode_mismatch("Weight: mixed-mode division");
  if (!b.is_positive()) throw validation_error("Weight: division by a non-positive weight");
  if (a.mode_ == WeightMode::rational) return Weight::rational(a.rat_ / b.rat_);
  return Weight::floating(a.flt_ / b.flt_);
}

namespace {

void require_mode(const Weight& w, WeightMode mode, const char* what) {
  if (w.mode() != mode) throw mode_mismatch(std::string(what) + ": atom weight mode differs from object mode");
}

bool weight_sums_to_one(const std::vector<Weight>& ws, WeightMode mode) {
  if (mode == WeightMode::rational) {
    Rational s = 0;
    for (const auto& w : ws) s += w.rat();
    return s == 1;
  }
  double s = 0.0;
  for (const auto& w : ws) s += w.flt();
  return std::abs(s - 1.0) <= kFloatMassTol;
}

Point flatten_tuple(const std::vector<Point>& tuple) {
  Point flat;
  for (const auto& p : tuple)
    flat.coords.insert(flat.coords.end(), p.coords.begin(), p.coords.end());
  return flat;
}

}  // namespace

namespace detail {

std::vector<WeightedPoint> merge_atoms(std::vector<WeightedPoint> atoms, WeightMode mode) {
  std::sort(atoms.begin(), atoms.end(),
            [](const WeightedPoint& a, const WeightedPoint& b) { return a.point < b.point; });
  std::vector<WeightedPoint> groups;
  if (mode == WeightMode::rational) {
    // Exactly equal points are adjacent after the sort.
    for (auto& a : atoms) {
      if (!groups.empty() && groups.back().point == a.point)
        groups.back().weight += a.weight;
      else
        groups.push_back(std::move(a));
    }
    return groups;
  }
  // Floating mode: tolerance-equal points need not be adjacent in more than one
  // dimension, but their first coordinates stay within the tolerance window.
  std::size_t window_start = 0;
  for (auto& a : atoms) {
    while (window_start < groups.size() &&
           groups[window_start].point.coords[0] < a.point.coords[0] - kFloatPointTol)
      ++window_start;
    bool merged = false;
    for (std::size_t g = window_start; g < groups.size(); ++g) {
      if (points_equal(groups[g].point, a.point, WeightMode::floating)) {
        groups[g].weight += a.weight;
        merged = true;
        break;
      }
    }
    if (!merged) groups.push_back(std::move(a));
  }
  return groups;
}

}  // namespace detail

DiscreteMeasure::DiscreteMeasure(FactorSpace space, WeightMode mode, std::vector<WeightedPoint> atoms)
    : space_(std::move(space)), mode_(mode), atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw validation_error("DiscreteMeasure: empty support");
  std::vector<Weight> ws;
  ws.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    require_mode(a.weight, mode_, "DiscreteMeasure");
    if (!a.weight.is_positive()) throw validation_error("DiscreteMeasure: weights must be positive");
    if (!space_.contains(a.point)) throw validation_error("DiscreteMeasure: atom outside space bounds");
    ws.push_back(a.weight);
  }
  if (detail::merge_atoms(atoms_, mode_).size() != atoms_.size())
    throw validation_error("DiscreteMeasure: atoms must be pairwise distinct");
  if (!weight_sums_to_one(ws, mode_))
    throw validation_error("DiscreteMeasure: weights must sum to 1");
}

DiscreteCoupling::DiscreteCoupling(std::vector<FactorSpace> spaces, WeightMode mode,
                                   std::vector<CouplingAtom> atoms, MassPolicy policy)
    : spaces_(std::move(spaces)), mode_(mode), atoms_(std::move(atoms)), policy_(policy) {
  if (spaces_.size() < 2) throw validation_error("DiscreteCoupling: needs at least two marginals");
  if (atoms_.empty()) throw validation_error("DiscreteCoupling: empty support");
  std::vector<WeightedPoint> flat;
  std::vector<Weight> ws;
  flat.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    require_mode(a.weight, mode_, "DiscreteCoupling");
    if (!a.weight.is_positive()) throw validation_error("DiscreteCoupling: weights must be positive");
    if (a.tuple.size() != spaces_.size())
      throw validation_error("DiscreteCoupling: tuple length != number of marginals");
    for (std::size_t k = 0; k < spaces_.size(); ++k)
      if (!spaces_[k].contains(a.tuple[k]))
        throw validation_error("DiscreteCoupling: tuple component outside its space");
    flat.push_back({flatten_tuple(a.tuple), a.weight});
    ws.push_back(a.weight);
  }
  if (detail::merge_atoms(flat, mode_).size() != atoms_.size())
    throw validation_error("DiscreteCoupling: support tuples must be pairwise distinct");
  if (policy_ == MassPolicy::probability && !weight_sums_to_one(ws, mode_))
    throw validation_error("DiscreteCoupling: weights must sum to 1");
}

std::vector<std::vector<Point>> DiscreteCoupling::support() const {
  std::vector<std::vector<Point>> s;
  s.reserve(atoms_.size());
  for (const auto& a : atoms_) s.push_back(a.tuple);
  return s;
}

DiscreteMeasure marginal(const DiscreteCoupling& plan, std::size_t k) {
  if (k >= plan.n_marginals()) throw validation_error("marginal: index out of range");
  if (plan.mass_policy() != MassPolicy::probability)
    throw validation_error("marginal: plan must be a probability coupling");
  std::vector<WeightedPoint> atoms;
  atoms.reserve(plan.size());
  for (const auto& a : plan.atoms()) atoms.push_back({a.tuple[k], a.weight});
  return DiscreteMeasure(plan.spaces()[k], plan.mode(),
                         detail::merge_atoms(std::move(atoms), plan.mode()));
}

DiscreteCoupling sample_submeasure(const DiscreteCoupling& plan, std::size_t l, std::uint64_t seed) {
  const std::size_t n = plan.size();
  if (l < 1 || l > n) throw validation_error("sample_submeasure: l out of range");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < l; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(l);
  std::sort(idx.begin(), idx.end());
  Weight w = plan.mode() == WeightMode::rational
                 ? Weight::rational(Rational(1, static_cast<long>(l)))
                 : Weight::floating(1.0 / static_cast<double>(l));
  std::vector<CouplingAtom> atoms;
  atoms.reserve(l);
  for (auto i : idx) atoms.push_back({plan.atoms()[i].tuple, w});
  return DiscreteCoupling(plan.spaces(), plan.mode(), std::move(atoms));
}

namespace {

// Fixed dictionary member i on flattened coordinates, clipped to [-1, 1].
double dictionary_eval(std::size_t i, std::size_t total_dim, const std::vector<double>& x) {
  double v;
  if (i < total_dim) {
    v = x[i];
  } else if (i < 2 * total_dim) {
    double c = x[i - total_dim];
    v = c * c;
  } else {
    std::size_t j = i - 2 * total_dim;
    std::size_t block = j / (2 * total_dim);    // frequency index, 0-based
    std::size_t within = j % (2 * total_dim);
    double freq = static_cast<double>(block + 1);
    double c = x[within % total_dim];
    v = within < total_dim ? std::sin(freq * c) : std::cos(freq * c);
  }
  return std::clamp(v, -1.0, 1.0);
}

double dictionary_gap(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b,
                      std::size_t total_dim, std::size_t dict_size) {
  if (dict_size < 1) throw validation_error("bl_discrepancy: dictionary must be nonempty");
  double worst = 0.0;
  for (std::size_t i = 0; i < dict_size; ++i) {
    double ia = 0.0, ib = 0.0;
    for (const auto& wp : a) ia += wp.weight.as_double() * dictionary_eval(i, total_dim, wp.point.coords);
    for (const auto& wp : b) ib += wp.weight.as_double() * dictionary_eval(i, total_dim, wp.point.coords);
    worst = std::max(worst, std::abs(ia - ib));
  }
  return worst;
}

}  // namespace

double bl_discrepancy(const DiscreteMeasure& a, const DiscreteMeasure& b, std::size_t dict_size) {
  if (!(a.space() == b.space())) throw validation_error("bl_discrepancy: space mismatch");
  auto ma = detail::merge_atoms(a.atoms(), a.mode());
  auto mb = detail::merge_atoms(b.atoms(), b.mode());
  return dictionary_gap(ma, mb, a.space().dim, dict_size);
}

double bl_discrepancy(const DiscreteCoupling& a, const DiscreteCoupling& b, std::size_t dict_size) {
  if (a.spaces() != b.spaces()) throw validation_error("bl_discrepancy: space mismatch");
  std::size_t total_dim = 0;
  for (const auto& s : a.spaces()) total_dim += s.dim;
  std::vector<WeightedPoint> fa, fb;
  fa.reserve(a.size());
  fb.reserve(b.size());
  for (const auto& atom : a.atoms()) fa.push_back({flatten_tuple(atom.tuple), atom.weight});
  for (const auto& atom : b.atoms()) fb.push_back({flatten_tuple(atom.tuple), atom.weight});
  auto ma = detail::merge_atoms(std::move(fa), a.mode());
  auto mb = detail::merge_atoms(std::move(fb), b.mode());
  return dictionary_gap(ma, mb, total_dim, dict_size);
}

bool measures_equal(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!(a.space() == b.space())) return false;
  auto ma = detail::merge_atoms(a.atoms(), a.mode());
  auto mb = detail::merge_atoms(b.atoms(), b.mode());
  if (ma.size() != mb.size()) return false;
  const bool exact = a.mode() == WeightMode::rational && b.mode() == WeightMode::rational;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (exact) {
      if (!(ma[i].point == mb[i].point)) return false;
      if (ma[i].weight.rat() != mb[i].weight.rat()) return false;
    } else {
      if (!points_equal(ma[i].point, mb[i].point, WeightMode::floating)) return false;
      if (std::abs(ma[i].weight.as_double() - mb[i].weight.as_double()) > kFloatMassTol) return false;
    }
  }
  return true;
}

}  // namespace motcert
