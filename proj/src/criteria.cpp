#include "entq/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "entq/error.hpp"

namespace entq {

using nlohmann::json;

namespace {

void check_observable(const Observable& o, Index components, const std::string& what) {
  if (o.coeffs.size() != components) {
    throw InvalidInput(what + ": expected " + std::to_string(components) + " coefficients, got " +
                       std::to_string(o.coeffs.size()));
  }
  if (!o.coeffs.allFinite()) throw InvalidInput(what + ": non-finite coefficient");
  if (!std::isfinite(o.bounds.lambda_min) || !std::isfinite(o.bounds.lambda_max) ||
      o.bounds.lambda_min > o.bounds.lambda_max) {
    throw InvalidInput(what + ": invalid spectral bounds");
  }
}

void check_role(const VarianceRole& r, Index components, const std::string& what) {
  if (const auto* o = std::get_if<Observable>(&r)) {
    check_observable(*o, components, what);
  } else if (!(std::get<ConstantVariance>(r).value >= 0.0)) {
    throw InvalidInput(what + ": constant variance must be >= 0");
  }
}

double role_variance(const VarianceRole& r, const FlatMoments& m) {
  if (const auto* o = std::get_if<Observable>(&r)) return m.variance_of(o->coeffs);
  return std::get<ConstantVariance>(r).value;
}

double cap_of(const SpectralBounds& b, VarianceCap cap) {
  return cap == VarianceCap::Sharp ? b.variance_cap() : b.square_cap();
}

double role_cap(const VarianceRole& r, VarianceCap cap) {
  if (const auto* o = std::get_if<Observable>(&r)) return cap_of(o->bounds, cap);
  return std::get<ConstantVariance>(r).value;
}

HermitianOperator shifted_square(const HermitianOperator& op, double s) {
  const HermitianOperator shifted = op - s * HermitianOperator::identity(op.dim());
  return shifted.squared();
}

}  // namespace

void SumCriterion::validate(Index components) const {
  for (std::size_t k = 0; k < variance_terms.size(); ++k) {
    check_observable(variance_terms[k], components, "variance term " + std::to_string(k));
  }
  check_observable(offset, components, "offset operator");
  for (double c : constant_variances) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidInput("constant variances must be finite and >= 0");
  }
}

void ProductCriterion::validate(Index components) const {
  check_role(o1, components, "O1");
  check_role(o2, components, "O2");
  check_observable(b, components, "B");
}

double sum_value(const SumCriterion& c, const FlatMoments& m) {
  c.validate(m.size());
  double s = 0.0;
  for (const auto& term : c.variance_terms) s += m.variance_of(term.coeffs);
  for (double k : c.constant_variances) s += k;
  return s - m.mean_of(c.offset.coeffs);
}

ProductTerms product_terms(const ProductCriterion& c, const FlatMoments& m) {
  c.validate(m.size());
  return {role_variance(c.o1, m), role_variance(c.o2, m), m.mean_of(c.b.coeffs)};
}

double product_value(const ProductCriterion& c, const FlatMoments& m) {
  const auto terms = product_terms(c, m);
  if (terms.mean_b == 0.0) throw DegenerateCriterion("<B> = 0: product criterion is degenerate");
  return terms.var1 * terms.var2 / (terms.mean_b * terms.mean_b);
}

SumCriterion tangent_criterion(const ProductCriterion& c, double t) {
  SumCriterion out;
  const double at = std::abs(t);
  if (const auto* o = std::get_if<Observable>(&c.o1)) {
    out.variance_terms.push_back(*o);
  } else {
    out.constant_variances.push_back(std::get<ConstantVariance>(c.o1).value);
  }
  if (const auto* o = std::get_if<Observable>(&c.o2)) {
    out.variance_terms.push_back(o->scaled(2.0 * t));
  } else {
    out.constant_variances.push_back(4.0 * t * t * std::get<ConstantVariance>(c.o2).value);
  }
  out.offset = c.b.scaled(4.0 * at);
  return out;
}

ProductCriterion with_flipped_offset(ProductCriterion c) {
  c.b = c.b.scaled(-1.0);
  return c;
}

namespace {

double optimal_shift(const Observable& o, const FlatMoments& m) {
  for (Index i = 0; i < o.coeffs.size(); ++i) {
    if (o.coeffs(i) != 0.0 && m.unmeasured_mean(i)) return 0.5 * (o.bounds.lambda_min + o.bounds.lambda_max);
  }
  return o.bounds.clamp(m.mean_of(o.coeffs));
}

}  // namespace

WitnessParams optimal_shifts(const SumCriterion& c, const FlatMoments& m) {
  WitnessParams p;
  for (const auto& term : c.variance_terms) p.s.push_back(optimal_shift(term, m));
  return p;
}

WitnessParams optimal_shifts(const ProductCriterion& c, const FlatMoments& m, double t) {
  WitnessParams p;
  for (const auto* role : {&c.o1, &c.o2}) {
    if (const auto* o = std::get_if<Observable>(role)) p.s.push_back(optimal_shift(*o, m));
  }
  p.t = t;
  return p;
}

double witness_expectation(const SumCriterion& c, const FlatMoments& m, std::span<const double> s) {
  if (s.size() != c.variance_terms.size()) throw InvalidInput("one shift per variance term required");
  double value = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& coeffs = c.variance_terms[k].coeffs;
    const double d = m.mean_of(coeffs) - s[k];
    value += m.variance_of(coeffs) + d * d;
  }
  for (double k : c.constant_variances) value += k;
  return value - m.mean_of(c.offset.coeffs);
}

SpectralConstants constants(const SumCriterion& c, VarianceCap cap) {
  SpectralConstants out;
  out.n = c.offset.bounds.lambda_max;
  double m = 0.0;
  for (const auto& term : c.variance_terms) m += cap_of(term.bounds, cap);
  for (double k : c.constant_variances) m += k;
  out.m = m - c.offset.bounds.lambda_min;
  return out;
}

SpectralConstants constants(const ProductCriterion& c, std::optional<double> t, VarianceCap cap) {
  SpectralConstants out;
  const double v1 = role_cap(c.o1, cap);
  const double v2 = role_cap(c.o2, cap);
  out.n = c.b.bounds.lambda_max;
  out.m = v1 + v2 - c.b.bounds.lambda_min;
  if (t) {
    const double tt = *t;
    out.m_t = v1 + 4.0 * tt * tt * v2 - 4.0 * std::abs(tt) * c.b.bounds.lambda_min;
  }
  return out;
}

HermitianOperator materialize(const Observable& o, const ComponentOperators& ops) {
  if (ops.empty()) throw InvalidInput("no component operators supplied");
  if (static_cast<Index>(ops.size()) != o.coeffs.size()) {
    throw InvalidInput("observable has " + std::to_string(o.coeffs.size()) + " coefficients but " +
                       std::to_string(ops.size()) + " component operators were supplied");
  }
  HermitianOperator out = HermitianOperator::zero(ops.front().dim());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const double c = o.coeffs(static_cast<Index>(i));
    if (c != 0.0) out += c * ops[i];
  }
  return out;
}

HermitianOperator witness_sum(const SumCriterion& c, const WitnessParams& p, const ComponentOperators& ops) {
  if (p.s.size() != c.variance_terms.size()) throw InvalidInput("one shift per variance term required");
  if (ops.empty()) throw InvalidInput("witness materialization needs component operators");
  const Index dim = ops.front().dim();
  double constant = 0.0;
  for (double k : c.constant_variances) constant += k;
  HermitianOperator w = constant * HermitianOperator::identity(dim);
  for (std::size_t k = 0; k < p.s.size(); ++k) {
    w += shifted_square(materialize(c.variance_terms[k], ops), p.s[k]);
  }
  w -= materialize(c.offset, ops);
  return w;
}

HermitianOperator witness_product(const ProductCriterion& c, const WitnessParams& p, const ComponentOperators& ops) {
  if (!p.t) throw InvalidInput("product witness needs the tangent parameter t");
  if (ops.empty()) throw InvalidInput("witness materialization needs component operators");
  const double t = *p.t;
  const Index dim = ops.front().dim();
  HermitianOperator w = HermitianOperator::zero(dim);
  std::size_t next_shift = 0;
  const double weights[2] = {1.0, 4.0 * t * t};
  const VarianceRole* roles[2] = {&c.o1, &c.o2};
  for (int r = 0; r < 2; ++r) {
    if (const auto* o = std::get_if<Observable>(roles[r])) {
      if (next_shift >= p.s.size()) throw InvalidInput("missing shift for an observable variance role");
      w += weights[r] * shifted_square(materialize(*o, ops), p.s[next_shift++]);
    } else {
      w += (weights[r] * std::get<ConstantVariance>(*roles[r]).value) * HermitianOperator::identity(dim);
    }
  }
  if (next_shift != p.s.size()) throw InvalidInput("too many shifts for this criterion");
  w -= (4.0 * std::abs(t)) * materialize(c.b, ops);
  return w;
}

ProductCriterion wineland_criterion(double n_particles) {
  if (!(n_particles > 0.0) || !std::isfinite(n_particles)) {
    throw InvalidInput("Wineland criterion needs a positive particle number");
  }
  const SpectralBounds spin(-0.5 * n_particles, 0.5 * n_particles, true);
  ProductCriterion c;
  c.o1 = Observable::unit(3, static_cast<Index>(Axis::Z), spin);
  c.o2 = ConstantVariance{n_particles};
  c.b = Observable::unit(3, static_cast<Index>(Axis::X), spin);
  return c;
}

ProductCriterion giovannetti_criterion(double n_a, double n_b, double g_z, double g_y, double sign_a,
                                       double sign_b) {
  if (!(n_a >= 0.0) || !(n_b >= 0.0) || !std::isfinite(n_a) || !std::isfinite(n_b)) {
    throw InvalidInput("Giovannetti criterion needs finite nonnegative particle numbers");
  }
  if (!std::isfinite(g_z) || !std::isfinite(g_y)) throw InvalidInput("gains must be finite");
  const double sa = sign_a < 0 ? -1.0 : 1.0;
  const double sb = sign_b < 0 ? -1.0 : 1.0;
  const double gzgy = std::abs(g_z * g_y);

  ProductCriterion c;
  Eigen::VectorXd o1 = Eigen::VectorXd::Zero(6);
  o1(component(Region::A, Axis::Z)) = g_z;
  o1(component(Region::B, Axis::Z)) = 1.0;
  const double r1 = 0.5 * (std::abs(g_z) * n_a + n_b);
  c.o1 = Observable{o1, {-r1, r1, true}};

  Eigen::VectorXd o2 = Eigen::VectorXd::Zero(6);
  o2(component(Region::A, Axis::Y)) = g_y;
  o2(component(Region::B, Axis::Y)) = 1.0;
  const double r2 = 0.5 * (std::abs(g_y) * n_a + n_b);
  c.o2 = Observable{o2, {-r2, r2, true}};

  Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
  b(component(Region::A, Axis::X)) = 0.5 * gzgy * sa;
  b(component(Region::B, Axis::X)) = 0.5 * sb;
  const double n = 0.25 * (gzgy * n_a + n_b);
  c.b = Observable{b, {-n, n, true}};
  return c;
}

ProductCriterion giovannetti_criterion(const BipartiteMomentData& m, double g_z, double g_y) {
  const double xa = m.unmeasured_mean(component(Region::A, Axis::X)) ? 0.0 : m.mean_A(0);
  const double xb = m.unmeasured_mean(component(Region::B, Axis::X)) ? 0.0 : m.mean_B(0);
  return giovannetti_criterion(m.n_A, m.n_B, g_z, g_y, xa < 0 ? -1.0 : 1.0, xb < 0 ? -1.0 : 1.0);
}

ComponentOperators dicke_components(int n_particles) {
  const DickeBasis basis(n_particles);
  return {collective_spin(basis, Axis::X), collective_spin(basis, Axis::Y), collective_spin(basis, Axis::Z)};
}

ComponentOperators qubit_components(int n_qubits) {
  return {qubit_collective_spin(n_qubits, Axis::X), qubit_collective_spin(n_qubits, Axis::Y),
          qubit_collective_spin(n_qubits, Axis::Z)};
}

ComponentOperators bipartite_qubit_components(int n_a, int n_b) {
  if (n_a < 1 || n_b < 1) throw InvalidInput("each region needs at least one qubit");
  const Index dim_a = Index{1} << n_a;
  const Index dim_b = Index{1} << n_b;
  if (dim_a * dim_b > kMaxTensorDim) throw SizeError("total dimension exceeds " + std::to_string(kMaxTensorDim));
  const std::vector<Index> dims{dim_a, dim_b};
  ComponentOperators out;
  for (int region = 0; region < 2; ++region) {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      const SiteOperator site{region, qubit_collective_spin(region == 0 ? n_a : n_b, a)};
      out.push_back(tensor_embed(std::span(&site, 1), dims));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration files

namespace {

double json_number(const json& doc, const std::string& field) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw SchemaError(field, "missing required field");
  if (!it->is_number()) throw SchemaError(field, "expected a number");
  return it->get<double>();
}

Observable observable_from_json(const json& doc, Index components, const std::string& field) {
  if (!doc.is_object()) throw SchemaError(field, "expected an object with coeffs, lambda_min, lambda_max");
  for (const auto& [key, value] : doc.items()) {
    if (key != "coeffs" && key != "lambda_min" && key != "lambda_max") {
      throw SchemaError(field + "." + key, "unknown field");
    }
  }
  const auto it = doc.find("coeffs");
  if (it == doc.end()) throw SchemaError(field + ".coeffs", "missing required field");
  if (!it->is_array() || static_cast<Index>(it->size()) != components) {
    throw SchemaError(field + ".coeffs", "expected " + std::to_string(components) + " numbers");
  }
  Observable o;
  o.coeffs.resize(components);
  for (Index i = 0; i < components; ++i) {
    if (!(*it)[i].is_number()) throw SchemaError(field + ".coeffs", "expected numbers");
    o.coeffs(i) = (*it)[i].get<double>();
  }
  try {
    o.bounds = SpectralBounds(json_number(doc, "lambda_min"), json_number(doc, "lambda_max"), true);
  } catch (const SchemaError& e) {
    throw SchemaError(field + "." + e.field(), "missing or non-numeric spectral bound");
  } catch (const InvalidInput& e) {
    throw SchemaError(field, e.what());
  }
  return o;
}

VarianceRole role_from_json(const json& doc, Index components, const std::string& field) {
  if (doc.is_object() && doc.contains("constant")) {
    if (doc.size() != 1 || !doc["constant"].is_number() || doc["constant"].get<double>() < 0) {
      throw SchemaError(field, "constant role must be {\"constant\": <nonnegative number>}");
    }
    return ConstantVariance{doc["constant"].get<double>()};
  }
  return observable_from_json(doc, components, field);
}

json observable_to_json(const Observable& o) {
  json coeffs = json::array();
  for (Index i = 0; i < o.coeffs.size(); ++i) coeffs.push_back(o.coeffs(i));
  return {{"coeffs", coeffs}, {"lambda_min", o.bounds.lambda_min}, {"lambda_max", o.bounds.lambda_max}};
}

json role_to_json(const VarianceRole& r) {
  if (const auto* o = std::get_if<Observable>(&r)) return observable_to_json(*o);
  return {{"constant", std::get<ConstantVariance>(r).value}};
}

void allow_only(const json& doc, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) throw SchemaError(key, "unknown field");
  }
}

}  // namespace

CriterionConfig parse_criterion_config(const json& doc) {
  if (!doc.is_object()) throw SchemaError("", "criterion config must be a JSON object");
  const auto kind_it = doc.find("kind");
  if (kind_it == doc.end() || !kind_it->is_string()) throw SchemaError("kind", "missing or not a string");
  const auto kind = kind_it->get<std::string>();
  CriterionConfig cfg;
  if (kind == "wineland") {
    allow_only(doc, {"kind", "n_particles"});
    cfg.kind = CriterionConfig::Kind::Wineland;
    if (doc.contains("n_particles")) cfg.n_particles = json_number(doc, "n_particles");
    return cfg;
  }
  if (kind == "giovannetti") {
    allow_only(doc, {"kind", "g_z", "g_y"});
    cfg.kind = CriterionConfig::Kind::Giovannetti;
    if (doc.contains("g_z") != doc.contains("g_y")) throw SchemaError("g_z", "g_z and g_y must be given together");
    if (doc.contains("g_z")) {
      cfg.g_z = json_number(doc, "g_z");
      cfg.g_y = json_number(doc, "g_y");
    }
    return cfg;
  }
  if (kind != "custom") throw SchemaError("kind", "expected \"wineland\", \"giovannetti\" or \"custom\"");

  cfg.kind = CriterionConfig::Kind::Custom;
  const auto form_it = doc.find("form");
  if (form_it == doc.end() || !form_it->is_string()) throw SchemaError("form", "expected \"sum\" or \"product\"");
  const auto comp_it = doc.find("components");
  if (comp_it == doc.end() || !comp_it->is_number_integer() ||
      (comp_it->get<int>() != 3 && comp_it->get<int>() != 6)) {
    throw SchemaError("components", "expected 3 (single) or 6 (bipartite)");
  }
  const Index components = comp_it->get<int>();
  if (*form_it == "sum") {
    allow_only(doc, {"kind", "form", "components", "variance_terms", "offset", "constant_variances"});
    SumCriterion c;
    const auto terms = doc.find("variance_terms");
    if (terms == doc.end() || !terms->is_array()) throw SchemaError("variance_terms", "expected an array");
    for (std::size_t k = 0; k < terms->size(); ++k) {
      c.variance_terms.push_back(
          observable_from_json((*terms)[k], components, "variance_terms[" + std::to_string(k) + "]"));
    }
    const auto offset = doc.find("offset");
    if (offset == doc.end()) throw SchemaError("offset", "missing required field");
    c.offset = observable_from_json(*offset, components, "offset");
    if (const auto consts = doc.find("constant_variances"); consts != doc.end()) {
      if (!consts->is_array()) throw SchemaError("constant_variances", "expected an array");
      for (const auto& v : *consts) {
        if (!v.is_number() || v.get<double>() < 0) throw SchemaError("constant_variances", "expected numbers >= 0");
        c.constant_variances.push_back(v.get<double>());
      }
    }
    cfg.custom = c;
  } else if (*form_it == "product") {
    allow_only(doc, {"kind", "form", "components", "o1", "o2", "b"});
    ProductCriterion c;
    for (const char* field : {"o1", "o2", "b"}) {
      if (!doc.contains(field)) throw SchemaError(field, "missing required field");
    }
    c.o1 = role_from_json(doc["o1"], components, "o1");
    c.o2 = role_from_json(doc["o2"], components, "o2");
    c.b = observable_from_json(doc["b"], components, "b");
    cfg.custom = c;
  } else {
    throw SchemaError("form", "expected \"sum\" or \"product\"");
  }
  return cfg;
}

json criterion_config_to_json(const CriterionConfig& config) {
  json doc;
  switch (config.kind) {
    case CriterionConfig::Kind::Wineland:
      doc["kind"] = "wineland";
      if (config.n_particles) doc["n_particles"] = *config.n_particles;
      return doc;
    case CriterionConfig::Kind::Giovannetti:
      doc["kind"] = "giovannetti";
      if (config.g_z) doc["g_z"] = *config.g_z;
      if (config.g_y) doc["g_y"] = *config.g_y;
      return doc;
    case CriterionConfig::Kind::Custom: break;
  }
  doc["kind"] = "custom";
  if (const auto* s = std::get_if<SumCriterion>(&config.custom)) {
    doc["form"] = "sum";
    doc["components"] = s->offset.coeffs.size();
    doc["variance_terms"] = json::array();
    for (const auto& t : s->variance_terms) doc["variance_terms"].push_back(observable_to_json(t));
    doc["offset"] = observable_to_json(s->offset);
    doc["constant_variances"] = s->constant_variances;
  } else if (const auto* p = std::get_if<ProductCriterion>(&config.custom)) {
    doc["form"] = "product";
    doc["components"] = p->b.coeffs.size();
    doc["o1"] = role_to_json(p->o1);
    doc["o2"] = role_to_json(p->o2);
    doc["b"] = observable_to_json(p->b);
  } else {
    throw InvalidInput("custom criterion config without a criterion");
  }
  return doc;
}

AnyCriterion resolve_criterion(const CriterionConfig& config, const AnyMoments& data) {
  switch (config.kind) {
    case CriterionConfig::Kind::Wineland: {
      const auto* m = std::get_if<MomentData>(&data);
      if (m == nullptr) throw InvalidInput("the Wineland criterion needs single-ensemble moments");
      return wineland_criterion(config.n_particles.value_or(m->n_particles));
    }
    case CriterionConfig::Kind::Giovannetti: {
      const auto* m = std::get_if<BipartiteMomentData>(&data);
      if (m == nullptr) throw InvalidInput("the Giovannetti criterion needs bipartite moments");
      return giovannetti_criterion(*m, config.g_z.value_or(1.0), config.g_y.value_or(1.0));
    }
    case CriterionConfig::Kind::Custom: break;
  }
  const Index components = std::holds_alternative<MomentData>(data) ? 3 : 6;
  if (const auto* s = std::get_if<SumCriterion>(&config.custom)) {
    s->validate(components);
    return *s;
  }
  if (const auto* p = std::get_if<ProductCriterion>(&config.custom)) {
    p->validate(components);
    return *p;
  }
  throw InvalidInput("custom criterion config without a criterion");
}

}  // namespace entq
