#include "rrvi/problem_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "rrvi/errors.hpp"

namespace rrvi {

nlohmann::json vector_to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const nlohmann::json& arr) {
  const auto values = arr.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json problem_to_json(const FiniteSumProblem& problem) {
  if (!problem.is_affine()) {
    throw UnsupportedError("custom problems have no serialized form");
  }
  nlohmann::json doc;
  doc["kind"] = to_string(problem.kind());
  doc["n"] = problem.n();
  doc["d"] = problem.d();
  doc["seed"] = problem.seed();
  doc["spec"] = nlohmann::json::parse(problem.spec_json());
  auto& matrices = doc["matrices"] = nlohmann::json::array();
  auto& offsets = doc["offsets"] = nlohmann::json::array();
  for (std::size_t i = 0; i < problem.n(); ++i) {
    const Matrix& m = problem.matrix(i);
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    matrices.push_back(std::move(flat));
    offsets.push_back(vector_to_json(problem.offset(i)));
  }
  return doc;
}

FiniteSumProblem problem_from_json(const nlohmann::json& doc) {
  try {
    const ProblemKind kind = problem_kind_from_string(doc.at("kind").get<std::string>());
    const auto n = doc.at("n").get<std::size_t>();
    const auto d = doc.at("d").get<std::size_t>();
    const auto& mats = doc.at("matrices");
    const auto& offs = doc.at("offsets");
    if (mats.size() != n || offs.size() != n) {
      throw ParameterError("problem document: component count does not match n");
    }
    const auto dd = static_cast<Eigen::Index>(d);
    std::vector<Matrix> matrices(n);
    std::vector<Vector> offsets(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto flat = mats[i].get<std::vector<double>>();
      if (flat.size() != d * d) throw ParameterError("problem document: matrix size mismatch");
      matrices[i] =
          Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              flat.data(), dd, dd);
      offsets[i] = vector_from_json(offs[i]);
      if (offsets[i].size() != dd) throw ParameterError("problem document: offset size mismatch");
    }
    auto p = FiniteSumProblem::affine(kind, std::move(matrices), std::move(offsets));
    const std::string spec = doc.contains("spec") ? doc["spec"].dump() : "{}";
    return p.with_metadata(doc.value("seed", std::uint64_t{0}), spec);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed problem document: ") + e.what());
  }
}

void write_problem(const FiniteSumProblem& problem, std::ostream& out,
                   const nlohmann::json& extra) {
  nlohmann::json doc = problem_to_json(problem);
  for (const auto& [key, value] : extra.items()) doc[key] = value;
  out << doc.dump() << '\n';
}

FiniteSumProblem read_problem(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("cannot parse problem document: ") + e.what());
  }
  return problem_from_json(doc);
}

FiniteSumProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open problem file '" + path + "'");
  return read_problem(in);
}

}  // namespace rrvi
