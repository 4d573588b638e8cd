#pragma once

// Line-oriented key/value readers for frame spec files and cohomology model
// files. Indices in files are 1-based. See docs/FORMATS.md.

#include "akscal/cohomology.hpp"
#include "akscal/error.hpp"
#include "akscal/lie_geometry.hpp"
#include "akscal/rational.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace akscal::io {

namespace detail {

struct Line {
  int number;
  std::string key;
  std::vector<std::string> args;
};

inline std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    Line line{number, {}, {}};
    if (!(words >> line.key)) continue;
    for (std::string w; words >> w;) line.args.push_back(w);
    out.push_back(std::move(line));
  }
  return out;
}

[[noreturn]] inline void fail(const std::string& module, const std::string& source, int line, const std::string& what) {
  throw Error(module, "parse", source + ":" + std::to_string(line) + ": " + what);
}

inline std::optional<std::int64_t> parseInt(const std::string& s) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data() + (s.starts_with('+') ? 1 : 0), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

inline std::optional<double> parseReal(const std::string& s) {
  if (auto r = parseRational(s)) return toDouble(*r);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

template <class S>
std::optional<S> parseScalar(const std::string& s) {
  if constexpr (is_exact_v<S>) {
    return parseRational(s);
  } else {
    return parseReal(s);
  }
}

inline std::string readFile(const std::string& path, const std::string& module) {
  std::ifstream in(path);
  if (!in) throw Error(module, "io", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses a frame spec. Keys: name, dim, c i j k value, J row (dim rows, in
/// order), volume v (repeatable). The result is validated.
template <class S>
lie::LieFrameSpec<S> parseSpec(const std::string& text, const std::string& source = "<spec>") {
  const std::string mod = "lie-geometry";
  const auto lines = detail::tokenize(text);
  if (lines.empty()) detail::fail(mod, source, 0, "empty spec");
  std::string name = "unnamed";
  std::optional<int> dim;
  std::vector<std::tuple<int, int, int, S, int>> brackets;
  std::vector<std::vector<S>> jRows;
  std::vector<double> volumes;
  for (const auto& ln : lines) {
    auto need = [&](std::size_t n) {
      if (ln.args.size() != n)
        detail::fail(mod, source, ln.number, "'" + ln.key + "' expects " + std::to_string(n) + " values");
    };
    if (ln.key == "name") {
      need(1);
      name = ln.args[0];
    } else if (ln.key == "dim") {
      need(1);
      auto d = detail::parseInt(ln.args[0]);
      if (!d || *d < 2 || *d % 2 != 0 || *d > 64) detail::fail(mod, source, ln.number, "dim must be even in [2, 64]");
      if (dim) detail::fail(mod, source, ln.number, "dim given twice");
      dim = static_cast<int>(*d);
    } else if (ln.key == "c") {
      need(4);
      if (!dim) detail::fail(mod, source, ln.number, "'c' before 'dim'");
      int idx[3];
      for (int p = 0; p < 3; ++p) {
        auto v = detail::parseInt(ln.args[p]);
        if (!v || *v < 1 || *v > *dim) detail::fail(mod, source, ln.number, "index out of range 1.." + std::to_string(*dim));
        idx[p] = static_cast<int>(*v) - 1;
      }
      if (idx[0] == idx[1]) detail::fail(mod, source, ln.number, "[e_i, e_i] must vanish");
      auto v = detail::parseScalar<S>(ln.args[3]);
      if (!v) detail::fail(mod, source, ln.number, "bad value '" + ln.args[3] + "'");
      brackets.emplace_back(idx[0], idx[1], idx[2], *v, ln.number);
    } else if (ln.key == "J") {
      if (!dim) detail::fail(mod, source, ln.number, "'J' before 'dim'");
      need(static_cast<std::size_t>(*dim));
      std::vector<S> row;
      for (const auto& a : ln.args) {
        auto v = detail::parseScalar<S>(a);
        if (!v) detail::fail(mod, source, ln.number, "bad J entry '" + a + "'");
        row.push_back(*v);
      }
      jRows.push_back(std::move(row));
    } else if (ln.key == "volume") {
      need(1);
      auto v = detail::parseReal(ln.args[0]);
      if (!v || !(*v > 0.0)) detail::fail(mod, source, ln.number, "volume must be a positive number");
      volumes.push_back(*v);
    } else {
      detail::fail(mod, source, ln.number, "unknown key '" + ln.key + "'");
    }
  }
  if (!dim) detail::fail(mod, source, lines.back().number, "missing 'dim'");
  if (static_cast<int>(jRows.size()) != *dim)
    detail::fail(mod, source, lines.back().number, "expected " + std::to_string(*dim) + " J rows");

  lie::LieFrameSpec<S> spec(name, *dim);
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& [a, b, k, v, number] : brackets) {
    const auto key = std::make_tuple(std::min(a, b), std::max(a, b), k);
    if (!seen.insert(key).second) detail::fail(mod, source, number, "bracket coefficient given twice");
    spec.addBracket(a, b, k, v);
  }
  for (int r = 0; r < *dim; ++r)
    for (int c = 0; c < *dim; ++c) spec.j(r, c) = jRows[r][c];
  spec.latticeVolumes = volumes;
  lie::validate(spec);
  return spec;
}

template <class S>
lie::LieFrameSpec<S> loadSpec(const std::string& path) {
  return parseSpec<S>(detail::readFile(path, "lie-geometry"), path);
}

struct ModelFile {
  cohomology::CohomologyModel model;
  std::optional<cohomology::SymplecticClass> seed;
};

/// Parses a model. Keys: name, n, rank, Q row (rank rows), c1, fiberChern,
/// chi, tau, seed (rank reals), seedFiber l. The model is validated.
inline ModelFile parseModel(const std::string& text, const std::string& source = "<model>") {
  const std::string mod = "cohomology-zbound";
  const auto lines = detail::tokenize(text);
  if (lines.empty()) detail::fail(mod, source, 0, "empty model");
  ModelFile out;
  auto& m = out.model;
  m.name = "unnamed";
  std::optional<int> rank;
  std::vector<std::vector<std::int64_t>> qRows;
  std::optional<std::vector<std::int64_t>> c1;
  std::optional<Eigen::VectorXd> seed;
  std::optional<double> seedFiber;
  std::set<std::string> once;
  for (const auto& ln : lines) {
    if (ln.key != "Q" && !once.insert(ln.key).second) detail::fail(mod, source, ln.number, "'" + ln.key + "' given twice");
    auto need = [&](std::size_t n) {
      if (ln.args.size() != n)
        detail::fail(mod, source, ln.number, "'" + ln.key + "' expects " + std::to_string(n) + " values");
    };
    auto ints = [&]() {
      std::vector<std::int64_t> v;
      for (const auto& a : ln.args) {
        auto x = detail::parseInt(a);
        if (!x) detail::fail(mod, source, ln.number, "expected an integer, got '" + a + "'");
        v.push_back(*x);
      }
      return v;
    };
    auto needRank = [&]() {
      if (!rank) detail::fail(mod, source, ln.number, "'" + ln.key + "' before 'rank'");
      need(static_cast<std::size_t>(*rank));
    };
    if (ln.key == "name") {
      need(1);
      m.name = ln.args[0];
    } else if (ln.key == "n") {
      need(1);
      m.n = static_cast<int>(ints()[0]);
    } else if (ln.key == "rank") {
      need(1);
      const auto r = ints()[0];
      if (r < 1 || r > 64) detail::fail(mod, source, ln.number, "rank must be in [1, 64]");
      rank = static_cast<int>(r);
    } else if (ln.key == "Q") {
      needRank();
      qRows.push_back(ints());
    } else if (ln.key == "c1") {
      needRank();
      c1 = ints();
    } else if (ln.key == "fiberChern") {
      need(1);
      m.fiberChern = ints()[0];
    } else if (ln.key == "chi") {
      need(1);
      m.euler = ints()[0];
    } else if (ln.key == "tau") {
      need(1);
      m.signature = ints()[0];
    } else if (ln.key == "seed") {
      needRank();
      Eigen::VectorXd v(*rank);
      for (int i = 0; i < *rank; ++i) {
        auto x = detail::parseReal(ln.args[i]);
        if (!x) detail::fail(mod, source, ln.number, "bad seed entry '" + ln.args[i] + "'");
        v(i) = *x;
      }
      seed = v;
    } else if (ln.key == "seedFiber") {
      need(1);
      seedFiber = detail::parseReal(ln.args[0]);
      if (!seedFiber) detail::fail(mod, source, ln.number, "bad seedFiber");
    } else {
      detail::fail(mod, source, ln.number, "unknown key '" + ln.key + "'");
    }
  }
  const int last = lines.back().number;
  if (!rank) detail::fail(mod, source, last, "missing 'rank'");
  if (static_cast<int>(qRows.size()) != *rank) detail::fail(mod, source, last, "expected " + std::to_string(*rank) + " Q rows");
  if (!c1) detail::fail(mod, source, last, "missing 'c1'");
  m.q = cohomology::IntMatrix(*rank, *rank);
  m.c1Base = cohomology::IntVector(*rank);
  for (int r = 0; r < *rank; ++r) {
    m.c1Base(r) = (*c1)[r];
    for (int c = 0; c < *rank; ++c) m.q(r, c) = qRows[r][c];
  }
  cohomology::validate(m);
  if (seed) {
    if ((m.n == 3) != seedFiber.has_value())
      detail::fail(mod, source, last, "seedFiber is required exactly for product models");
    out.seed = cohomology::SymplecticClass{*seed, seedFiber};
  } else if (seedFiber) {
    detail::fail(mod, source, last, "seedFiber without seed");
  }
  return out;
}

inline ModelFile loadModel(const std::string& path) {
  return parseModel(detail::readFile(path, "cohomology-zbound"), path);
}

/// Class text "n0,n1,...;l" (fiber part only for product models).
inline cohomology::SymplecticClass parseClass(const std::string& text, const cohomology::CohomologyModel& m) {
  const std::string mod = "cohomology-zbound";
  std::string basePart = text, fiberPart;
  if (auto semi = text.find(';'); semi != std::string::npos) {
    basePart = text.substr(0, semi);
    fiberPart = text.substr(semi + 1);
  }
  std::vector<double> vals;
  std::string tok;
  std::istringstream in(basePart);
  while (std::getline(in, tok, ',')) {
    auto v = detail::parseReal(tok);
    if (!v) throw Error(mod, "parse", "bad class entry '" + tok + "'");
    vals.push_back(*v);
  }
  if (static_cast<int>(vals.size()) != m.rank()) throw Error(mod, "parse", "class rank does not match model");
  cohomology::SymplecticClass c{Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())), std::nullopt};
  if (!fiberPart.empty()) {
    auto l = detail::parseReal(fiberPart);
    if (!l) throw Error(mod, "parse", "bad fiber coefficient '" + fiberPart + "'");
    c.fiber = *l;
  }
  if ((m.n == 3) != c.fiber.has_value()) throw Error(mod, "parse", "fiber coefficient present iff the model is a product");
  return c;
}

}  // namespace akscal::io
