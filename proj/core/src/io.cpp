#include <wext/io.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace wext {

using nlohmann::json;

AtomicMeasure load_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::bad_input, "cannot open measure file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::bad_input, "measure file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("dim") || !doc.contains("points"))
    throw Error(Errc::bad_input, "measure file " + path.string() + " needs dim and points");
  const Eigen::Index dim = doc["dim"].get<Eigen::Index>();
  const auto& pts = doc["points"];
  if (!pts.is_array() || pts.empty())
    throw Error(Errc::bad_input, "measure file " + path.string() + " has no points");
  Matrix points(Eigen::Index(pts.size()), dim);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto& row = pts[size_t(i)];
    if (!row.is_array() || Eigen::Index(row.size()) != dim)
      throw Error(Errc::bad_input,
                  "point " + std::to_string(i) + " in " + path.string() + " has wrong length");
    for (Eigen::Index k = 0; k < dim; ++k) points(i, k) = row[size_t(k)].get<double>();
  }
  Vector weights;
  if (doc.contains("weights")) {
    const auto& w = doc["weights"];
    if (Eigen::Index(w.size()) != points.rows())
      throw Error(Errc::bad_input, "weights length mismatch in " + path.string());
    weights.resize(points.rows());
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights(i) = w[size_t(i)].get<double>();
  } else {
    weights = Vector::Constant(points.rows(), 1.0 / double(points.rows()));
  }
  return make_measure(std::move(points), std::move(weights));
}

void save_measure(const AtomicMeasure& m, const std::filesystem::path& path) {
  json doc;
  doc["dim"] = m.dim();
  json pts = json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.dim(); ++k) row.push_back(m.points(i, k));
    pts.push_back(std::move(row));
  }
  doc["points"] = std::move(pts);
  json w = json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) w.push_back(m.weights(i));
  doc["weights"] = std::move(w);
  std::ofstream out(path);
  if (!out) throw Error(Errc::bad_input, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

void save_plan_csv(const Matrix& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::bad_input, "cannot write " + path.string());
  char buf[32];
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", plan(i, j));
      out << buf << (j + 1 == plan.cols() ? '\n' : ',');
    }
  }
}

Matrix load_plan_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::bad_input, "cannot open plan file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(Errc::invalid_plan, "bad plan entry '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(Errc::invalid_plan, "ragged plan rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::invalid_plan, "empty plan file " + path.string());
  Matrix plan(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
  for (Eigen::Index i = 0; i < plan.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.cols(); ++j)
      plan(i, j) = rows[size_t(i)][size_t(j)];
  return plan;
}

void save_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::bad_input, "cannot write " + path.string());
  out << "iter,f,marginal_residual,z_grad_norm,epsilon\n";
  char buf[160];
  for (const TraceRecord& r : trace.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.f,
                  r.marginal_residual, r.z_grad_norm, r.epsilon);
    out << buf;
  }
}

}  // namespace wext
