#ifndef RRVI_PROBLEM_IO_HPP
#define RRVI_PROBLEM_IO_HPP

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "rrvi/problems.hpp"

namespace rrvi {

// Problem documents look like
//   {"kind": "QuadraticGame", "n": 100, "d": 200, "seed": 7, "spec": {...},
//    "matrices": [[row-major d*d values], ...], "offsets": [[d values], ...]}
// Doubles are written with round-trip precision, so reading a document back
// reproduces every matrix entry bit for bit.

nlohmann::json problem_to_json(const FiniteSumProblem& problem);
FiniteSumProblem problem_from_json(const nlohmann::json& doc);

void write_problem(const FiniteSumProblem& problem, std::ostream& out,
                   const nlohmann::json& extra = nlohmann::json::object());
FiniteSumProblem read_problem(std::istream& in);
FiniteSumProblem load_problem(const std::string& path);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& arr);

}  // namespace rrvi

#endif  // RRVI_PROBLEM_IO_HPP
