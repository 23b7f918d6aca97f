#include "ruelle/config.hpp"

#include <fstream>

#include "ruelle/errors.hpp"

namespace ruelle {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw UsageError("config: missing numeric field '" + key + "'");
  return j.at(key).get<double>();
}

std::vector<double> number_list(const json& j) {
  if (!j.is_array()) throw UsageError("config: expected a numeric array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw UsageError("config: expected a numeric array");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> matrix(const json& j) {
  if (!j.is_array()) throw UsageError("config: expected a matrix");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(number_list(row));
  return out;
}

Alphabet alphabet_from_json(const json& spec) {
  const std::string kind = spec.value("kind", "finite");
  if (kind == "finite") {
    const auto nodes = static_cast<std::size_t>(spec.value("nodes", 2));
    if (spec.contains("distances"))
      return Alphabet::finite(nodes, matrix(spec.at("distances")));
    return Alphabet::finite(nodes);
  }
  if (kind == "real-line") {
    const int dim = spec.value("dimension", 1);
    const int order = spec.value("order", 21);
    return Alphabet::real_line(dim, order);
  }
  if (kind == "circle") {
    const auto nodes = static_cast<std::size_t>(spec.value("nodes", 32));
    return Alphabet::circle(nodes);
  }
  throw UsageError("config: unknown alphabet kind '" + kind + "'");
}

AprioriMeasure measure_from_json(const json& doc, const Alphabet& alphabet) {
  if (!doc.contains("measure")) return AprioriMeasure::uniform(alphabet);
  const json& spec = doc.at("measure");
  const std::string backend = spec.value("backend", "uniform");
  if (backend == "uniform") return AprioriMeasure::uniform(alphabet);
  if (backend == "exact") {
    if (!spec.contains("weights"))
      throw UsageError("config: exact measure needs 'weights'");
    return AprioriMeasure::exact(alphabet, number_list(spec.at("weights")));
  }
  if (backend == "gauss-hermite") {
    if (alphabet.kind() != AlphabetKind::real_line)
      throw UsageError("config: gauss-hermite backend needs a real-line alphabet");
    // The real-line alphabet already is a Gauss-Hermite grid; reuse its
    // parameters so alphabet and weights stay aligned.
    const json& aspec = doc.at("alphabet");
    return AprioriMeasure::gauss_hermite(aspec.value("dimension", 1),
                                         aspec.value("order", 21));
  }
  throw UsageError("config: unknown measure backend '" + backend + "'");
}

}  // namespace

Potential potential_from_json(const nlohmann::json& spec,
                              const Alphabet& alphabet) {
  if (!spec.is_object())
    throw UsageError("config: potential must be an object");
  const std::string family = spec.value("family", "zero");
  const double alpha = spec.value("alpha", 1.0);
  Potential f;
  if (family == "zero") {
    f = constant_potential(0.0);
  } else if (family == "constant") {
    f = constant_potential(require_number(spec, "value"));
  } else if (family == "first-coordinate") {
    if (!spec.contains("values"))
      throw UsageError("config: first-coordinate potential needs 'values'");
    auto values = number_list(spec.at("values"));
    if (values.size() != alphabet.size())
      throw UsageError("config: first-coordinate table size must match the alphabet");
    f = first_coordinate_potential(std::move(values), alpha);
  } else if (family == "two-coordinate") {
    if (!spec.contains("matrix"))
      throw UsageError("config: two-coordinate potential needs 'matrix'");
    auto m = matrix(spec.at("matrix"));
    if (m.size() != alphabet.size())
      throw UsageError("config: two-coordinate matrix size must match the alphabet");
    f = two_coordinate_potential(std::move(m), alpha);
  } else if (family == "quadratic") {
    f = quadratic_potential(alphabet, spec.value("coeff", -1.0));
  } else if (family == "long-range") {
    const double j0 = require_number(spec, "j0");
    const double ratio = require_number(spec, "ratio");
    if (spec.contains("pair") && spec.at("pair").is_array()) {
      auto g = matrix(spec.at("pair"));
      if (g.size() != alphabet.size())
        throw UsageError("config: long-range pair table size must match the alphabet");
      f = long_range_potential(j0, ratio, std::move(g),
                               alpha == 1.0 ? 0.5 : alpha);
    } else {
      f = long_range_potential(j0, ratio, alphabet.size(),
                               alpha == 1.0 ? 0.5 : alpha);
    }
  } else {
    throw UsageError("config: unknown potential family '" + family + "'");
  }
  const double beta = spec.value("beta", 1.0);
  if (beta != 1.0) f = scale_potential(f, beta);
  return f;
}

std::size_t default_grid_depth(std::size_t nodes) {
  if (nodes <= 2) return 8;
  std::size_t depth = 1, size = nodes;
  while (depth < 8 && size * nodes <= 1'000'000) {
    size *= nodes;
    ++depth;
  }
  return depth;
}

RunConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw UsageError("config: root must be an object");
  Alphabet alphabet = alphabet_from_json(
      doc.contains("alphabet") ? doc.at("alphabet") : json::object());
  AprioriMeasure measure = measure_from_json(doc, alphabet);
  Potential potential = potential_from_json(
      doc.contains("potential") ? doc.at("potential") : json{{"family", "zero"}},
      alphabet);

  const json depth_spec =
      doc.contains("depth") ? doc.at("depth") : json::object();
  std::size_t grid_depth = depth_spec.contains("grid")
                               ? depth_spec.at("grid").get<std::size_t>()
                               : default_grid_depth(alphabet.size());
  if (grid_depth < 1) throw UsageError("config: grid depth must be >= 1");

  const json tol =
      doc.contains("tolerances") ? doc.at("tolerances") : json::object();
  const double eigen_tol = tol.value("eigen", 1e-13);
  const double residual_tol = tol.value("residual", 1e-8);
  if (eigen_tol <= 0.0 || residual_tol <= 0.0)
    throw UsageError("config: tolerances must be > 0");

  const json eig = doc.contains("eigen") ? doc.at("eigen") : json::object();
  EigenOptions opts;
  opts.tol = eigen_tol;
  opts.max_iter = eig.value("max_iter", std::size_t{2000});
  opts.atom_cap = eig.value("atom_cap", std::size_t{4096});
  opts.fit_gap = eig.value("fit_gap", false);
  opts.gap_n_max = eig.value("gap_n_max", std::size_t{12});
  if (opts.atom_cap < alphabet.size())
    throw UsageError("config: atom cap must be >= the alphabet size");

  RunConfig cfg{doc,
                std::move(measure),
                std::move(potential),
                grid_depth,
                eigen_tol,
                residual_tol,
                doc.value("seed", std::uint64_t{20240801}),
                doc.value("threads", 1),
                opts};
  if (cfg.threads < 1) throw UsageError("config: threads must be >= 1");
  // Fail early if the grid does not fit in memory.
  (void)GridFunction(cfg.grid_depth, alphabet.size());
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace ruelle
