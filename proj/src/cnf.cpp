#include "ucs/cnf.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ucs {

namespace {

std::string set_string(Mask m) {
  if (m == 0) return "-";
  std::string out;
  for (int i : elements_of(m)) {
    if (!out.empty()) out += ",";
    out += std::to_string(i);
  }
  return out;
}

}  // namespace

CnfInstance export_cnf(const Family& f, int k,
                       std::optional<int> max_sample_size) {
  const int n = f.base_size();
  if (k < 0 || k > n) throw std::invalid_argument("export_cnf: bad size bound");
  const Mask full = full_mask(n);
  const std::uint64_t values = std::uint64_t{1} << n;

  std::vector<Mask> keys;
  for (int c = 0; c <= k; ++c)
    for_each_combination(n, c, [&](Mask y) { keys.push_back(y); });
  if (values * keys.size() > (std::uint64_t{1} << 22))
    throw std::invalid_argument("export_cnf: instance exceeds the variable budget");

  CnfInstance inst;
  inst.base_size = n;
  inst.size_bound = k;
  inst.num_vars = static_cast<int>(values * keys.size());
  inst.var_map.reserve(static_cast<std::size_t>(inst.num_vars));
  std::vector<int> key_index(std::size_t{1} << n, -1);
  for (std::size_t i = 0; i < keys.size(); ++i) key_index[keys[i]] = static_cast<int>(i);
  auto var_id = [&](Mask y, Mask fn) {
    return static_cast<int>(key_index[y] * static_cast<int>(values)) +
           static_cast<int>(fn) + 1;
  };
  for (Mask y : keys)
    for (Mask fn = 0; fn < values; ++fn) inst.var_map.emplace_back(y, fn);

  // One-hot per entry: at least one function, pairwise at most one.
  for (Mask y : keys) {
    std::vector<int> alo;
    alo.reserve(values);
    for (Mask fn = 0; fn < values; ++fn) alo.push_back(var_id(y, fn));
    inst.clauses.push_back(std::move(alo));
    for (Mask a = 0; a < values; ++a)
      for (Mask b = a + 1; b < values; ++b)
        inst.clauses.push_back({-var_id(y, a), -var_id(y, b)});
  }

  // Support clause per labeled sample: some entry inside the domain decodes
  // to an extension.
  std::vector<Mask> buf;
  for (Mask s = 0;; ++s) {
    if (!max_sample_size || popcount(s) <= *max_sample_size) {
      trace_values(f, s, buf);
      for (Mask v : buf) {
        std::vector<int> clause;
        int cap = std::min(k, popcount(s));
        for (int c = 0; c <= cap; ++c)
          for_each_subset(s, [&](Mask y) {
            if (popcount(y) != c) return;
            Mask rest = full & ~s;
            for_each_subset(rest, [&](Mask add) {
              clause.push_back(var_id(y, v | add));
            });
          });
        inst.clauses.push_back(std::move(clause));
      }
    }
    if (s == full) break;
  }
  return inst;
}

void write_dimacs(std::ostream& out, const CnfInstance& inst) {
  for (std::size_t i = 0; i < inst.var_map.size(); ++i)
    out << "c var " << (i + 1) << " " << set_string(inst.var_map[i].first)
        << " "
        << function_to_string(BoolFunc{inst.base_size, inst.var_map[i].second})
        << "\n";
  out << "c decoder base " << inst.base_size << " size " << inst.size_bound
      << "\n";
  out << "p cnf " << inst.num_vars << " " << inst.clauses.size() << "\n";
  for (const auto& cl : inst.clauses) {
    for (int lit : cl) out << lit << " ";
    out << "0\n";
  }
}

CnfInstance read_dimacs(std::istream& in) {
  CnfInstance inst;
  std::string line;
  std::size_t expected_clauses = 0;
  bool have_p = false;
  std::vector<std::pair<int, std::pair<Mask, Mask>>> mapping;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == 'c') {
      std::string c, word;
      ls >> c >> word;
      if (word == "var") {
        int id;
        std::string set_str, fn_str;
        if (!(ls >> id >> set_str >> fn_str))
          throw std::runtime_error("dimacs line " + std::to_string(lineno) +
                                   ": bad var mapping");
        Mask y = 0;
        if (set_str != "-") {
          std::istringstream ss(set_str);
          std::string tok;
          while (std::getline(ss, tok, ',')) y |= Mask{1} << std::stoi(tok);
        }
        mapping.push_back(
            {id, {y, parse_function_string(fn_str, static_cast<int>(fn_str.size()))}});
        inst.base_size = static_cast<int>(fn_str.size());
      } else if (word == "decoder") {
        std::string b, s;
        int n, k;
        if (ls >> b >> n >> s >> k) {
          inst.base_size = n;
          inst.size_bound = k;
        }
      }
      continue;
    }
    if (line[0] == 'p') {
      std::string p, cnf;
      if (!(ls >> p >> cnf >> inst.num_vars >> expected_clauses) ||
          cnf != "cnf")
        throw std::runtime_error("dimacs: bad p line");
      have_p = true;
      continue;
    }
    std::vector<int> clause;
    int lit;
    while (ls >> lit) {
      if (lit == 0) break;
      clause.push_back(lit);
    }
    inst.clauses.push_back(std::move(clause));
  }
  if (!have_p) throw std::runtime_error("dimacs: missing p line");
  if (inst.clauses.size() != expected_clauses)
    throw std::runtime_error("dimacs: clause count mismatch");
  if (!mapping.empty()) {
    inst.var_map.assign(static_cast<std::size_t>(inst.num_vars), {0, 0});
    for (auto& [id, entry] : mapping) {
      if (id < 1 || id > inst.num_vars)
        throw std::runtime_error("dimacs: var mapping id out of range");
      inst.var_map[static_cast<std::size_t>(id - 1)] = entry;
    }
  }
  return inst;
}

DpllResult dpll_solve(const CnfInstance& inst) {
  // Conflict-driven variant of DPLL: two watched literals, first-UIP clause
  // learning with non-chronological backjumping, first-unassigned-variable
  // decisions trying true first.  No restarts and no activity heuristics,
  // so runs are deterministic.
  DpllResult res;
  const int nv = inst.num_vars;
  auto lit_code = [](int lit) {
    int v = lit > 0 ? lit : -lit;
    return 2 * (v - 1) + (lit < 0 ? 1 : 0);
  };

  std::vector<std::vector<int>> clauses;
  std::vector<std::array<int, 2>> watch_of;
  std::vector<std::vector<int>> watchers(static_cast<std::size_t>(2 * nv));
  std::vector<signed char> assign(static_cast<std::size_t>(nv), 0);
  std::vector<int> var_level(static_cast<std::size_t>(nv), 0);
  std::vector<int> var_reason(static_cast<std::size_t>(nv), -1);
  std::vector<int> trail;
  std::vector<std::size_t> level_marks;  // trail mark per decision level

  auto lit_value = [&](int code) {
    signed char a = assign[static_cast<std::size_t>(code >> 1)];
    return (code & 1) ? static_cast<signed char>(-a) : a;
  };
  auto current_level = [&]() { return static_cast<int>(level_marks.size()); };

  auto add_clause = [&](std::vector<int> codes) {
    int id = static_cast<int>(clauses.size());
    watch_of.push_back({codes[0], codes.size() > 1 ? codes[1] : codes[0]});
    watchers[static_cast<std::size_t>(codes[0])].push_back(id);
    if (codes.size() > 1)
      watchers[static_cast<std::size_t>(codes[1])].push_back(id);
    clauses.push_back(std::move(codes));
    return id;
  };

  std::vector<int> units;
  for (const auto& cl : inst.clauses) {
    if (cl.empty()) return res;
    std::vector<int> codes;
    codes.reserve(cl.size());
    for (int lit : cl) codes.push_back(lit_code(lit));
    if (codes.size() == 1) {
      units.push_back(codes[0]);
      continue;
    }
    add_clause(std::move(codes));
  }

  auto enqueue = [&](int code, int reason) -> bool {
    signed char want = (code & 1) ? static_cast<signed char>(-1)
                                  : static_cast<signed char>(1);
    signed char& slot = assign[static_cast<std::size_t>(code >> 1)];
    if (slot == want) return true;
    if (slot == -want) return false;
    slot = want;
    var_level[static_cast<std::size_t>(code >> 1)] = current_level();
    var_reason[static_cast<std::size_t>(code >> 1)] = reason;
    trail.push_back(code);
    return true;
  };

  std::size_t prop_head = 0;
  // returns the conflicting clause id, or -1
  auto propagate = [&]() -> int {
    while (prop_head < trail.size()) {
      int falsified = trail[prop_head++] ^ 1;
      std::vector<int>& ws = watchers[static_cast<std::size_t>(falsified)];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < ws.size(); ++i) {
        int id = ws[i];
        std::array<int, 2>& w = watch_of[static_cast<std::size_t>(id)];
        int other = w[0] == falsified ? w[1] : w[0];
        if (lit_value(other) > 0) {
          ws[keep++] = id;
          continue;
        }
        int replacement = -1;
        for (int code : clauses[static_cast<std::size_t>(id)]) {
          if (code == other || code == falsified) continue;
          if (lit_value(code) >= 0) {
            replacement = code;
            break;
          }
        }
        if (replacement >= 0) {
          (w[0] == falsified ? w[0] : w[1]) = replacement;
          watchers[static_cast<std::size_t>(replacement)].push_back(id);
          continue;
        }
        ws[keep++] = id;
        if (!enqueue(other, id)) {
          for (++i; i < ws.size(); ++i) ws[keep++] = ws[i];
          ws.resize(keep);
          return id;
        }
      }
      ws.resize(keep);
    }
    return -1;
  };

  auto backjump_to = [&](int target_level) {
    std::size_t mark = level_marks[static_cast<std::size_t>(target_level)];
    while (trail.size() > mark) {
      assign[static_cast<std::size_t>(trail.back() >> 1)] = 0;
      trail.pop_back();
    }
    level_marks.resize(static_cast<std::size_t>(target_level));
    prop_head = trail.size();
  };

  std::vector<char> seen(static_cast<std::size_t>(nv), 0);
  // deterministic VSIDS: bump variables met in analysis, decay by scaling
  // the increment, break ties toward the lowest index
  std::vector<double> activity(static_cast<std::size_t>(nv), 0.0);
  double bump = 1.0;
  auto bump_var = [&](int v) {
    activity[static_cast<std::size_t>(v)] += bump;
    if (activity[static_cast<std::size_t>(v)] > 1e100) {
      for (double& a : activity) a *= 1e-100;
      bump *= 1e-100;
    }
  };
  // first-UIP analysis; fills learnt (UIP first) and the backjump level
  auto analyze = [&](int conflict_id, std::vector<int>& learnt) -> int {
    learnt.clear();
    int path = 0;
    int pvar = -1;
    std::size_t index = trail.size();
    int confl = conflict_id;
    std::vector<int> to_clear;
    while (true) {
      for (int q : clauses[static_cast<std::size_t>(confl)]) {
        int v = q >> 1;
        if (v == pvar || seen[static_cast<std::size_t>(v)] ||
            var_level[static_cast<std::size_t>(v)] == 0)
          continue;
        seen[static_cast<std::size_t>(v)] = 1;
        bump_var(v);
        to_clear.push_back(v);
        if (var_level[static_cast<std::size_t>(v)] == current_level())
          ++path;
        else
          learnt.push_back(q);
      }
      while (!seen[static_cast<std::size_t>(trail[index - 1] >> 1)]) --index;
      int plit = trail[--index];
      pvar = plit >> 1;
      seen[static_cast<std::size_t>(pvar)] = 0;
      --path;
      if (path == 0) {
        learnt.insert(learnt.begin(), plit ^ 1);
        break;
      }
      confl = var_reason[static_cast<std::size_t>(pvar)];
    }
    // local minimization: drop literals whose whole reason is already in
    // the clause (marked seen) or fixed at level 0
    for (int v : to_clear) seen[static_cast<std::size_t>(v)] = 1;
    std::size_t out = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      int v = learnt[i] >> 1;
      int r = var_reason[static_cast<std::size_t>(v)];
      bool removable = r >= 0;
      if (removable)
        for (int q : clauses[static_cast<std::size_t>(r)]) {
          int u = q >> 1;
          if (u == v || seen[static_cast<std::size_t>(u)] ||
              var_level[static_cast<std::size_t>(u)] == 0)
            continue;
          removable = false;
          break;
        }
      if (!removable) learnt[out++] = learnt[i];
    }
    learnt.resize(out);
    int bj = 0;
    std::size_t second = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      int lv = var_level[static_cast<std::size_t>(learnt[i] >> 1)];
      if (lv > bj) {
        bj = lv;
        second = i;
      }
    }
    if (learnt.size() > 1) std::swap(learnt[1], learnt[second]);
    for (int v : to_clear) seen[static_cast<std::size_t>(v)] = 0;
    bump *= 1.0 / 0.95;
    return bj;
  };

  for (int code : units)
    if (!enqueue(code, -1)) return res;
  if (propagate() >= 0) return res;  // conflict with no decisions

  // Luby restart schedule over conflict counts, learned clauses kept.
  std::vector<signed char> phase(static_cast<std::size_t>(nv), -1);
  auto luby = [](std::uint64_t i) {
    std::uint64_t k = 1;
    while ((std::uint64_t{1} << k) - 1 < i + 1) ++k;
    while ((std::uint64_t{1} << k) - 1 != i + 1) {
      --k;
      i -= (std::uint64_t{1} << k) - 1;
    }
    return std::uint64_t{1} << (k - 1);
  };
  std::uint64_t restart_index = 0;
  std::uint64_t conflicts_until_restart = 256 * luby(restart_index);

  while (true) {
    int var = -1;
    double best = -1.0;
    for (int v = 0; v < nv; ++v)
      if (assign[static_cast<std::size_t>(v)] == 0 &&
          activity[static_cast<std::size_t>(v)] > best) {
        var = v;
        best = activity[static_cast<std::size_t>(v)];
      }
    if (var < 0) {
      res.satisfiable = true;
      res.model.assign(static_cast<std::size_t>(nv), false);
      for (int v = 0; v < nv; ++v)
        res.model[static_cast<std::size_t>(v)] =
            assign[static_cast<std::size_t>(v)] > 0;
      return res;
    }
    ++res.nodes;
    level_marks.push_back(trail.size());
    enqueue(2 * var + (phase[static_cast<std::size_t>(var)] > 0 ? 0 : 1), -1);
    int confl;
    bool restart_pending = false;
    while ((confl = propagate()) >= 0) {
      if (current_level() == 0) return res;  // refuted outright
      std::vector<int> learnt;
      int bj = analyze(confl, learnt);
      for (std::size_t t = level_marks[static_cast<std::size_t>(bj)];
           t < trail.size(); ++t)
        phase[static_cast<std::size_t>(trail[t] >> 1)] =
            (trail[t] & 1) ? -1 : 1;
      backjump_to(bj);
      ++res.nodes;
      if (learnt.size() == 1) {
        if (!enqueue(learnt[0], -1)) return res;
      } else {
        int id = add_clause(std::move(learnt));
        enqueue(clauses[static_cast<std::size_t>(id)][0], id);
      }
      if (--conflicts_until_restart == 0) {
        ++restart_index;
        conflicts_until_restart = 256 * luby(restart_index);
        restart_pending = true;
      }
    }
    if (restart_pending && current_level() > 0) backjump_to(0);
  }
}

UnlabeledDecoder decoder_from_model(const CnfInstance& inst,
                                    const std::vector<bool>& model) {
  if (inst.var_map.size() != static_cast<std::size_t>(inst.num_vars))
    throw std::invalid_argument("decoder_from_model: instance lacks var mapping");
  std::vector<std::pair<Mask, Mask>> entries;
  std::vector<char> seen(std::size_t{1} << inst.base_size, 0);
  for (std::size_t i = 0; i < inst.var_map.size(); ++i) {
    if (!model[i]) continue;
    auto [y, fn] = inst.var_map[i];
    if (seen[y])
      throw std::invalid_argument("decoder_from_model: two functions for one entry");
    seen[y] = 1;
    entries.emplace_back(y, fn);
  }
  return UnlabeledDecoder(inst.base_size, inst.size_bound, std::move(entries));
}

}  // namespace ucs
