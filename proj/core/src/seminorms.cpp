#include "modlab/seminorms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>

#include "modlab/parallel.hpp"

namespace modlab {

namespace {

using Tag = SeminormId::Tag;

const std::map<std::string, Tag>& tag_table() {
  static const std::map<std::string, Tag> t{
      {"sm", Tag::Sm},     {"max", Tag::Max},   {"str", Tag::Str},   {"sm2", Tag::Sm2},   {"max2d", Tag::Max2d},
      {"ant", Tag::Ant},   {"str2", Tag::Str2}, {"gstr", Tag::Gstr}, {"sm1", Tag::Sm1},   {"max1", Tag::Max1},
      {"ant1", Tag::Ant1}, {"str1", Tag::Str1}, {"gstr1", Tag::Gstr1}};
  return t;
}

// One summand family: sum_k weight(k) * cap(norms of box_k u).
struct Term {
  std::vector<MixedNorm> cap;
  int smooth_axis = -1;  // >= 0: only k with |k_i| >= max(20, max_{j != i} |k_j|)
  double weight_power = 0.0;
  bool weight_on_axis = false;  // weight <k_i> instead of <k>
};

std::vector<Term> terms_for(const SeminormId& id, int dim) {
  std::vector<Term> out;
  const double m = id.m;
  auto smooth = [&](double power) {
    for (int i = 0; i < dim; ++i) {
      out.push_back({{MixedNorm::axis_outer(i, kInf, 2.0)}, i, power, true});
    }
  };
  auto per_axis = [&](double p, double pbar) {
    for (int i = 0; i < dim; ++i) out.push_back({{MixedNorm::axis_outer(i, p, pbar)}, -1, 0.0, false});
  };
  auto strichartz = [&](double power, double joint) {
    out.push_back({{MixedNorm::time_outer(kInf, 2.0), MixedNorm::joint(joint)}, -1, power, false});
  };
  switch (id.tag) {
    case Tag::Sm: smooth(0.5 + 1.0 / m); break;
    case Tag::Max: per_axis(m, kInf); break;
    case Tag::Str: strichartz(1.0 / m, m + 2.0); break;
    case Tag::Sm2: smooth(1.5); break;
    case Tag::Max2d: per_axis(2.0, kInf); break;
    case Tag::Ant: per_axis(2.0, 4.0); break;
    case Tag::Str2: strichartz(1.0, 4.0); break;
    case Tag::Gstr: out.push_back({{MixedNorm::joint(3.0)}, -1, 0.0, false}); break;
    case Tag::Sm1: smooth(4.0 / 3.0); break;
    case Tag::Max1: per_axis(3.0, kInf); break;
    case Tag::Ant1: per_axis(3.0, 6.0); break;
    case Tag::Str1: strichartz(5.0 / 6.0, 6.0); break;
    case Tag::Gstr1: out.push_back({{MixedNorm::joint(4.0)}, -1, 0.0, false}); break;
  }
  return out;
}

double term_weight(const Term& t, const LatticePoint& k, int dim) {
  if (t.smooth_axis >= 0) {
    const int i = t.smooth_axis;
    int other = 0;
    for (int j = 0; j < dim; ++j) {
      if (j != i) other = std::max(other, std::abs(k[j]));
    }
    if (std::abs(k[i]) < std::max(20, other)) return 0.0;
  }
  if (t.weight_power == 0.0) return 1.0;
  const double base = t.weight_on_axis ? std::sqrt(1.0 + double(k[t.smooth_axis]) * k[t.smooth_axis]) : japanese(k, dim);
  return std::pow(base, t.weight_power);
}

double combine(const std::vector<double>& v, CapRule rule) {
  double r = 0.0;
  for (double x : v) r = rule == CapRule::Max ? std::max(r, x) : r + x;
  return r;
}

// All (id, term, member) norms needed per box, with streaming accumulators.
struct Plan {
  struct Slot {
    std::size_t id;
    std::size_t term;
    double weight;
    std::vector<std::size_t> members;  // indices into norms
  };
  std::vector<MixedNorm> norms;
  std::vector<std::vector<Slot>> slots;  // per box
  std::vector<LatticePoint> boxes;
  std::vector<std::vector<Term>> terms;  // per id
};

std::size_t intern(std::vector<MixedNorm>& v, const MixedNorm& n) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].kind == n.kind && v[i].axis == n.axis && v[i].p_outer == n.p_outer && v[i].p_inner == n.p_inner) return i;
  }
  v.push_back(n);
  return v.size() - 1;
}

Plan make_plan(const Grid& g, const std::vector<SeminormId>& ids) {
  Plan plan;
  for (const auto& id : ids) {
    require(id.m >= 2, "seminorm parameter m must be at least 2");
    const int rd = id.required_dim();
    if (rd == 0) {
      require(g.dim >= 2, "seminorm " + id.name() + " needs dimension at least 2");
    } else {
      require(g.dim == rd, "seminorm " + id.name() + " needs dimension " + std::to_string(rd));
    }
    plan.terms.push_back(terms_for(id, g.dim));
  }
  const std::vector<LatticePoint> all = lattice(g);
  for (const auto& k : all) {
    std::vector<Plan::Slot> s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t t = 0; t < plan.terms[i].size(); ++t) {
        const Term& term = plan.terms[i][t];
        const double w = term_weight(term, k, g.dim);
        if (w == 0.0) continue;
        Plan::Slot slot{i, t, w, {}};
        for (const auto& n : term.cap) slot.members.push_back(intern(plan.norms, n));
        s.push_back(std::move(slot));
      }
    }
    if (!s.empty()) {
      plan.boxes.push_back(k);
      plan.slots.push_back(std::move(s));
    }
  }
  return plan;
}

SeminormTrace run(const SpaceTimeField& u, const std::vector<SeminormId>& ids, const Partition& P, CapRule rule,
                  bool full_trace) {
  require(u.slices.size() >= 2, "seminorms need at least two time slices");
  const Grid& g = u.grid;
  const Plan plan = make_plan(g, ids);
  const std::size_t J = u.slices.size() - 1;
  const std::size_t nb = plan.boxes.size();

  // Boxes that carry no mass in any slice are skipped.
  std::vector<double> bound(nb, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    const ComplexField fh = fourier_forward(u.slices[j]);
    parallel_for(nb, [&](std::size_t b) { bound[b] = std::max(bound[b], box_sup_bound(plan.boxes[b], fh, P)); });
  }
  const double top = nb ? *std::max_element(bound.begin(), bound.end()) : 0.0;

  std::vector<std::vector<std::unique_ptr<MixedNormAccumulator>>> acc(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    acc[b].resize(plan.norms.size());
    if (top == 0.0 || bound[b] <= 1e-15 * top) continue;
    for (const auto& slot : plan.slots[b]) {
      for (std::size_t mi : slot.members) {
        if (!acc[b][mi]) acc[b][mi] = std::make_unique<MixedNormAccumulator>(g, plan.norms[mi], u.dt);
      }
    }
  }

  SeminormTrace trace;
  for (const auto& id : ids) trace.names.push_back(id.name());

  auto evaluate = [&]() {
    std::vector<double> result(ids.size(), 0.0);
    // Terms are summed in box order, which keeps the accumulation order fixed.
    for (std::size_t i = 0; i < ids.size(); ++i) {
      double total = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        for (const auto& slot : plan.slots[b]) {
          if (slot.id != i || !acc[b][slot.members.front()]) continue;
          std::vector<double> vals;
          for (std::size_t mi : slot.members) vals.push_back(acc[b][mi]->value());
          total += slot.weight * combine(vals, rule);
        }
      }
      result[i] = total;
    }
    return result;
  };

  for (std::size_t j = 0; j < J; ++j) {
    const ComplexField fh = fourier_forward(u.slices[j]);
    parallel_for(nb, [&](std::size_t b) {
      if (acc[b].empty() || std::none_of(acc[b].begin(), acc[b].end(), [](const auto& p) { return bool(p); })) return;
      std::vector<cplx> piece(g.size());
      box_spectrum_into(plan.boxes[b], fh, P, piece);
      fourier_inverse_inplace(g, piece);
      for (auto& a : acc[b]) {
        if (a) a->push(piece.data());
      }
    });
    if (full_trace || j + 1 == J) {
      trace.window_end.push_back(u.time(j + 1));
      trace.values.push_back(evaluate());
    }
  }
  return trace;
}

}  // namespace

SeminormId SeminormId::parse(const std::string& text) {
  SeminormId id;
  std::string tag = text;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    tag = text.substr(0, colon);
    try {
      std::size_t used = 0;
      id.m = std::stoi(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw ValidationError("bad m");
    } catch (const std::exception&) {
      throw ValidationError("malformed seminorm parameter in '" + text + "'");
    }
  }
  const auto it = tag_table().find(tag);
  if (it == tag_table().end()) throw ValidationError("unknown seminorm '" + tag + "'");
  id.tag = it->second;
  if (colon != std::string::npos && id.required_dim() != 0) {
    throw ValidationError("seminorm '" + tag + "' has a fixed parameter");
  }
  require(id.m >= 2, "seminorm parameter m must be at least 2");
  if (id.tag == Tag::Sm2 || id.tag == Tag::Max2d || id.tag == Tag::Ant || id.tag == Tag::Str2 || id.tag == Tag::Gstr) {
    id.m = 2;
  } else if (id.required_dim() == 1) {
    id.m = 3;
  }
  return id;
}

std::string SeminormId::name() const {
  for (const auto& [k, v] : tag_table()) {
    if (v == tag) return required_dim() == 0 ? k + ":" + std::to_string(m) : k;
  }
  return "?";
}

int SeminormId::required_dim() const {
  switch (tag) {
    case Tag::Sm:
    case Tag::Max:
    case Tag::Str: return 0;
    case Tag::Sm2:
    case Tag::Max2d:
    case Tag::Ant:
    case Tag::Str2:
    case Tag::Gstr: return 2;
    default: return 1;
  }
}

double composite_seminorm(const SpaceTimeField& u, const SeminormId& id, const Partition& P, CapRule rule) {
  return run(u, {id}, P, rule, false).values.back()[0];
}

double composite_seminorm(const SpaceTimeField& u, const std::vector<SeminormId>& ids, const Partition& P,
                          CapRule rule) {
  require(!ids.empty(), "need at least one seminorm");
  return combine(run(u, ids, P, rule, false).values.back(), rule);
}

SeminormTrace seminorm_trace(const SpaceTimeField& u, const std::vector<SeminormId>& ids, const Partition& P,
                             CapRule rule) {
  return run(u, ids, P, rule, true);
}

void write_trace_csv(std::ostream& os, const SeminormTrace& trace) {
  os << "t_end";
  for (const auto& n : trace.names) os << ',' << n;
  os << '\n';
  os.precision(17);
  for (std::size_t r = 0; r < trace.values.size(); ++r) {
    os << trace.window_end[r];
    for (double v : trace.values[r]) os << ',' << v;
    os << '\n';
  }
}

}  // namespace modlab
