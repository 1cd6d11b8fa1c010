#include "btsa/psom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace btsa {

std::optional<ModelVariant> parse_variant(const std::string& s) {
  if (s == "ed") return ModelVariant::ed;
  if (s == "ed_network") return ModelVariant::ed_network;
  if (s == "ed_ramping") return ModelVariant::ed_ramping;
  if (s == "ed_network_ramping") return ModelVariant::ed_network_ramping;
  return std::nullopt;
}

std::string variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::ed: return "ed";
    case ModelVariant::ed_network: return "ed_network";
    case ModelVariant::ed_ramping: return "ed_ramping";
    case ModelVariant::ed_network_ramping: return "ed_network_ramping";
  }
  return "?";
}

RepresentativePeriod period_from_hours(const ValidatedCase& c, int start, int length, double weight) {
  RepresentativePeriod p;
  p.length = length;
  p.weight = weight;
  for (int k = start; k < start + length; ++k) {
    std::vector<double> d(static_cast<std::size_t>(c.n_buses()));
    for (int b = 0; b < c.n_buses(); ++b) d[b] = c.demand(b, k);
    std::vector<double> f(static_cast<std::size_t>(c.n_generators()));
    for (int g = 0; g < c.n_generators(); ++g) f[g] = c.cf(g, k);
    p.demand.push_back(std::move(d));
    p.cf.push_back(std::move(f));
  }
  return p;
}

int IndexMap::cols_per_slot() const { return cols_; }
int IndexMap::rows_first_slot() const { return rows_first_; }
int IndexMap::rows_next_slot() const { return rows_next_; }

namespace {

bool ramps(const Generator& g, ModelVariant v) { return has_ramping(v) && g.kind == GenKind::thermal && g.has_ramp(); }

int flow_rows_per_slot(const ValidatedCase& c, const BuildOptions& opts) {
  const int L = static_cast<int>(c.spec().lines.size());
  // per-bus mode: every line is incident to two buses, each with an out and an in row
  return opts.flow_limits == FlowLimitMode::per_line ? 2 * L : 4 * L;
}

}  // namespace

class ModelAssembler {
 public:
  ModelAssembler(const ValidatedCase& c, ModelVariant v, const BuildOptions& opts, bool aggregated)
      : c_(c), v_(v), opts_(opts), aggregated_(aggregated) {}

  BuiltModel build(const RepresentativePeriods& periods, int first_hour) {
    const bool net = has_network(v_);
    if (has_ramping(v_) && !c_.has_ramping())
      throw std::invalid_argument("variant " + variant_name(v_) + " needs a generator with ramp limits");
    const auto& spec = c_.spec();
    BuiltModel out;
    auto& lp = out.lp;
    auto& im = out.index;
    im.variant = v_;
    im.n_gens = c_.n_generators();
    im.n_nodes = net ? c_.n_buses() : 1;
    im.n_lines = net ? static_cast<int>(spec.lines.size()) : 0;
    const int G = im.n_gens, N = im.n_nodes, L = im.n_lines;

    std::vector<std::string> node_name;
    if (net)
      node_name = spec.buses;
    else
      node_name = {spec.buses.size() == 1 ? spec.buses[0] : std::string("system")};

    long total_slots = 0;
    for (const auto& p : periods) total_slots += p.length;
    im.gen_col_.reserve(total_slots * G);

    for (int r = 0; r < static_cast<int>(periods.size()); ++r) {
      const auto& per = periods[r];
      if (per.length < 1 || static_cast<int>(per.demand.size()) != per.length ||
          static_cast<int>(per.cf.size()) != per.length)
        throw std::invalid_argument("representative period " + std::to_string(r + 1) + " has inconsistent data");
      const double w = per.weight;
      const double w_gen = opts_.strict_paper_objective ? 1.0 : w;
      for (int pos = 0; pos < per.length; ++pos) {
        const int s = im.period_offset.back() + pos;
        const std::string sfx = suffix(r, pos, first_hour);
        const auto& dem = per.demand[pos];
        const auto& cf = per.cf[pos];
        const int col0 = lp.n_cols();
        const int row0 = lp.n_rows();

        for (int g = 0; g < G; ++g) {
          const auto& gen = spec.generators[g];
          double lo = gen.p_min, up = gen.p_max;
          if (gen.kind == GenKind::wind) {
            up = cf[g] * gen.p_max;
            lo = std::min(lo, up);
          }
          const std::string key = "p[g=" + gen.id;
          im.gen_col_.push_back(lp.add_column(key + sfx, gen.variable_cost * w_gen, lo, up));
          im.col_key_.push_back(key + "]");
        }
        for (int n = 0; n < N; ++n) {
          const std::string key = "nsp[bus=" + node_name[n];
          im.nsp_col_.push_back(lp.add_column(key + sfx, spec.nsp_cost * w, 0.0, kInf));
          im.col_key_.push_back(key + "]");
        }
        for (int l = 0; l < L; ++l) {
          const auto& line = spec.lines[l];
          for (int dir = 0; dir < 2; ++dir) {
            const std::string& a = dir == 0 ? line.from_bus : line.to_bus;
            const std::string& b = dir == 0 ? line.to_bus : line.from_bus;
            const std::string key = "flow[l=" + line.id + ",from=" + a + ",to=" + b;
            im.flow_col_.push_back(lp.add_column(key + sfx, line.transmission_cost * w_gen, 0.0, kInf));
            im.col_key_.push_back(key + "]");
          }
        }

        // balance: generation + nsp + imports - exports = demand
        for (int n = 0; n < N; ++n) {
          std::vector<std::pair<int, double>> e;
          double d = 0.0;
          if (net) {
            d = dem[n];
          } else {
            for (double x : dem) d += x;
          }
          for (int g = 0; g < G; ++g)
            if (!net || c_.generator_bus(g) == n) e.emplace_back(im.gen_col(s, g), 1.0);
          e.emplace_back(im.nsp_col(s, n), 1.0);
          for (int l = 0; l < L; ++l) {
            const int from = c_.line_from(l), to = c_.line_to(l);
            if (from == n) {
              e.emplace_back(im.flow_col(s, l, 0), -1.0);
              e.emplace_back(im.flow_col(s, l, 1), 1.0);
            } else if (to == n) {
              e.emplace_back(im.flow_col(s, l, 0), 1.0);
              e.emplace_back(im.flow_col(s, l, 1), -1.0);
            }
          }
          const std::string key = "balance[bus=" + node_name[n];
          im.balance_row_.push_back(lp.add_row(key + sfx, Sense::eq, d, e));
          im.row_key_.push_back(key + "]");
        }

        for (int g = 0; g < G; ++g) {
          const auto& gen = spec.generators[g];
          int up_row = -1, dn_row = -1;
          if (pos > 0 && ramps(gen, v_)) {
            const int cur = im.gen_col(s, g), prev = im.gen_col(s - 1, g);
            if (gen.ramp_up) {
              const std::string key = "rampup[t=" + gen.id;
              up_row = lp.add_row(key + sfx, Sense::le, *gen.ramp_up, {{cur, 1.0}, {prev, -1.0}});
              im.row_key_.push_back(key + "]");
            }
            if (gen.ramp_down) {
              const std::string key = "rampdown[t=" + gen.id;
              dn_row = lp.add_row(key + sfx, Sense::le, *gen.ramp_down, {{prev, 1.0}, {cur, -1.0}});
              im.row_key_.push_back(key + "]");
            }
          }
          im.rampup_row_.push_back(up_row);
          im.rampdown_row_.push_back(dn_row);
        }

        if (net) add_flow_limits(lp, im, s, sfx);

        for (int j = col0; j < lp.n_cols(); ++j) im.slot_cols_.push_back(j);
        for (int i = row0; i < lp.n_rows(); ++i) im.slot_rows_.push_back(i);
        im.slot_col_start_.push_back(static_cast<int>(im.slot_cols_.size()));
        im.slot_row_start_.push_back(static_cast<int>(im.slot_rows_.size()));
        if (pos == 0)
          im.rows_first_ = lp.n_rows() - row0;
        else
          im.rows_next_ = lp.n_rows() - row0;
        im.cols_ = lp.n_cols() - col0;
      }
      im.period_offset.push_back(im.period_offset.back() + per.length);
      im.period_weight.push_back(w);
    }
    if (im.rows_next_ == 0) im.rows_next_ = im.rows_first_;
    return out;
  }

 private:
  std::string suffix(int r, int pos, int first_hour) const {
    if (aggregated_) return ",r=" + std::to_string(r + 1) + ",k=" + std::to_string(pos + 1) + "]";
    return ",k=" + std::to_string(first_hour + pos + 1) + "]";
  }

  void add_flow_limits(LpProblem& lp, IndexMap& im, int s, const std::string& sfx) {
    const auto& lines = c_.spec().lines;
    const int L = static_cast<int>(lines.size());
    if (opts_.flow_limits == FlowLimitMode::per_line) {
      for (int l = 0; l < L; ++l)
        for (int dir = 0; dir < 2; ++dir) {
          const std::string key = "flowlim[l=" + lines[l].id + (dir == 0 ? ",dir=fwd" : ",dir=bwd");
          lp.add_row(key + sfx, Sense::le, lines[l].flow_limit, {{im.flow_col(s, l, dir), 1.0}});
          im.row_key_.push_back(key + "]");
        }
      return;
    }
    for (int b = 0; b < c_.n_buses(); ++b) {
      std::vector<std::pair<int, double>> out, in;
      std::vector<int> incident;
      for (int l = 0; l < L; ++l) {
        if (c_.line_from(l) == b) {
          out.emplace_back(im.flow_col(s, l, 0), 1.0);
          in.emplace_back(im.flow_col(s, l, 1), 1.0);
          incident.push_back(l);
        } else if (c_.line_to(l) == b) {
          out.emplace_back(im.flow_col(s, l, 1), 1.0);
          in.emplace_back(im.flow_col(s, l, 0), 1.0);
          incident.push_back(l);
        }
      }
      for (int l : incident) {
        const std::string dims = "[bus=" + c_.spec().buses[b] + ",l=" + lines[l].id;
        lp.add_row("flowout" + dims + sfx, Sense::le, lines[l].flow_limit, out);
        im.row_key_.push_back("flowout" + dims + "]");
        lp.add_row("flowin" + dims + sfx, Sense::le, lines[l].flow_limit, in);
        im.row_key_.push_back("flowin" + dims + "]");
      }
    }
  }

  const ValidatedCase& c_;
  ModelVariant v_;
  const BuildOptions& opts_;
  bool aggregated_;
};

BuiltModel build_full(const ValidatedCase& c, ModelVariant v, const BuildOptions& opts) {
  RepresentativePeriods whole{period_from_hours(c, 0, c.horizon(), 1.0)};
  return ModelAssembler(c, v, opts, false).build(whole, 0);
}

BuiltModel build_aggregated(const ValidatedCase& c, const RepresentativePeriods& periods, ModelVariant v,
                            const BuildOptions& opts) {
  double covered = 0.0;
  for (const auto& p : periods) {
    if (p.length < 1) throw std::invalid_argument("representative period length must be >= 1");
    if (!(p.weight > 0.0)) throw std::invalid_argument("representative period weight must be positive");
    covered += p.length * p.weight;
  }
  if (std::abs(covered - c.horizon()) > 1e-9 * c.horizon())
    throw std::invalid_argument("representative periods cover " + std::to_string(covered) + " hours, horizon is " +
                                std::to_string(c.horizon()));
  return ModelAssembler(c, v, opts, true).build(periods, 0);
}

ModelSize expected_size(const ValidatedCase& c, ModelVariant v, std::span<const int> period_lengths,
                        const BuildOptions& opts) {
  const bool net = has_network(v);
  const long G = c.n_generators();
  const long N = net ? c.n_buses() : 1;
  const long L = net ? static_cast<long>(c.spec().lines.size()) : 0;
  long ramp_rows = 0;
  for (const auto& g : c.spec().generators)
    if (ramps(g, v)) ramp_rows += (g.ramp_up ? 1 : 0) + (g.ramp_down ? 1 : 0);
  const long flow_rows = net ? flow_rows_per_slot(c, opts) : 0;
  ModelSize sz;
  for (int len : period_lengths) {
    sz.cols += len * (G + N + 2 * L);
    sz.rows += len * (N + flow_rows) + (len - 1) * ramp_rows;
  }
  return sz;
}

}  // namespace btsa
