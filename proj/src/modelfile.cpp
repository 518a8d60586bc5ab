#include "fluxlab/modelfile.hpp"

namespace fluxlab {

namespace {

Json complex_to_json(const Complex& c) { return Json{c.real(), c.imag()}; }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

Json matrix_to_json(const DenseMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(complex_to_json(m(r, c)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

DenseMatrix matrix_from_json(const Json& j) {
  const Eigen::Index rows = j.size();
  const Eigen::Index cols = rows > 0 ? j.at(0).size() : 0;
  DenseMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = complex_from_json(j.at(r).at(c));
    }
  }
  return m;
}

}  // namespace

Json save_model(const ModelSystem& model) {
  Json j;
  j["lattice"] = {{"d", model.spec.lattice.dimension()},
                  {"L", model.spec.lattice.side()}};
  j["kind"] = model.spec.kind == ParticleKind::Spin ? "spin" : "fermion";
  j["local_dim"] = model.spec.local_dim;
  j["charge_per_level"] = model.spec.charge_per_level;
  Json terms = Json::array();
  for (const auto& term : model.terms) {
    Json t;
    t["name"] = term.name;
    t["support"] = term.support.sites();
    if (std::holds_alternative<SpinTermData>(term.data)) {
      const auto& data = std::get<SpinTermData>(term.data);
      t["builder"] = "spin_block";
      t["sites"] = data.sites;
      t["block"] = matrix_to_json(data.block);
    } else {
      const auto& data = std::get<FermionTermData>(term.data);
      t["builder"] = "fermion_monomials";
      Json monos = Json::array();
      for (const auto& mono : data.monomials) {
        Json m;
        m["coeff"] = complex_to_json(mono.coeff);
        Json ops = Json::array();
        for (const auto& op : mono.ops) {
          ops.push_back(Json{{"site", op.site},
                             {"orbital", op.orbital},
                             {"dagger", op.dagger}});
        }
        m["ops"] = std::move(ops);
        monos.push_back(std::move(m));
      }
      t["monomials"] = std::move(monos);
    }
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

ModelSystem load_model(const Json& j) {
  ModelSystem model;
  model.spec.lattice = TorusLattice(j.at("lattice").at("d").get<int>(),
                                    j.at("lattice").at("L").get<int>());
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "spin") {
    model.spec.kind = ParticleKind::Spin;
  } else if (kind == "fermion") {
    model.spec.kind = ParticleKind::Fermion;
  } else {
    throw ValidationError("model file: unknown kind '" + kind + "'");
  }
  model.spec.local_dim = j.at("local_dim").get<int>();
  model.spec.charge_per_level =
      j.at("charge_per_level").get<std::vector<int>>();

  for (const auto& t : j.at("terms")) {
    const std::string builder = t.at("builder").get<std::string>();
    const std::string name = t.value("name", builder);
    if (builder == "spin_block") {
      SpinTermData data;
      data.sites = t.at("sites").get<std::vector<int>>();
      data.block = matrix_from_json(t.at("block"));
      LocalTerm term;
      term.name = name;
      term.support = Region(data.sites);
      term.data = std::move(data);
      model.terms.push_back(std::move(term));
    } else if (builder == "fermion_monomials") {
      FermionTermData data;
      for (const auto& m : t.at("monomials")) {
        FermionMonomial mono;
        mono.coeff = complex_from_json(m.at("coeff"));
        for (const auto& op : m.at("ops")) {
          mono.ops.push_back({op.at("site").get<int>(),
                              op.value("orbital", 0),
                              op.at("dagger").get<bool>()});
        }
        data.monomials.push_back(std::move(mono));
      }
      std::vector<int> sites;
      if (t.contains("support")) {
        sites = t.at("support").get<std::vector<int>>();
      } else {
        for (const auto& mono : data.monomials) {
          for (const auto& op : mono.ops) sites.push_back(op.site);
        }
      }
      LocalTerm term;
      term.name = name;
      term.support = Region(sites);
      term.data = std::move(data);
      model.terms.push_back(std::move(term));
    } else if (builder == "hopping") {
      const auto sites = t.at("sites").get<std::vector<int>>();
      model.terms.push_back(hopping_term(name, sites.at(0), sites.at(1),
                                         complex_from_json(t.at("amp"))));
    } else if (builder == "number") {
      model.terms.push_back(
          number_term(name, t.at("site").get<int>(), t.at("value").get<double>()));
    } else if (builder == "density_density") {
      const auto sites = t.at("sites").get<std::vector<int>>();
      model.terms.push_back(density_density_term(
          name, sites.at(0), sites.at(1), t.at("value").get<double>()));
    } else if (builder == "xx_exchange") {
      const auto sites = t.at("sites").get<std::vector<int>>();
      model.terms.push_back(spin_two_site_term(
          name, sites.at(0), sites.at(1), spin_raise(), spin_raise().adjoint(),
          t.at("coupling").get<double>() / 2.0, true));
    } else if (builder == "field_z") {
      model.terms.push_back(spin_site_term(
          name, t.at("site").get<int>(),
          DenseMatrix(t.at("value").get<double>() * pauli_z())));
    } else {
      throw ValidationError("model file: unknown builder '" + builder + "'");
    }
  }
  return model;
}

bool is_one_particle_file(const Json& j) {
  return j.value("one_particle", false);
}

OneParticleModel load_one_particle(const Json& j) {
  OneParticleModel m;
  m.lattice = TorusLattice(j.at("lattice").at("d").get<int>(),
                           j.at("lattice").at("L").get<int>());
  m.h = matrix_from_json(j.at("h"));
  m.mu = j.value("mu", 0.0);
  if (j.contains("u")) {
    m.u = matrix_from_json(j.at("u"));
  } else {
    m.u = DenseMatrix::Identity(m.h.rows(), m.h.cols());
  }
  return m;
}

Json save_one_particle(const OneParticleModel& model) {
  Json j;
  j["one_particle"] = true;
  j["lattice"] = {{"d", model.lattice.dimension()},
                  {"L", model.lattice.side()}};
  j["h"] = matrix_to_json(model.h);
  j["mu"] = model.mu;
  j["u"] = matrix_to_json(model.u);
  return j;
}

}  // namespace fluxlab
