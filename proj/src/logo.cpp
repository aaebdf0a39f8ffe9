#include "icc/logo.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "icc/errors.hpp"
#include "icc/linalg.hpp"
#include "icc/panel.hpp"

namespace icc {

namespace {

std::string index_list(const int* idx, int k) {
  std::string s = "{";
  for (int i = 0; i < k; ++i) {
    if (i) s += ", ";
    s += std::to_string(idx[i]);
  }
  return s + "}";
}

// Inverse of a clique/separator covariance block. Blocks with condition
// number above 1e12 get 1e-8 * trace/k added to the diagonal before the
// factorization; a block that stays singular is an error naming its indices.
Eigen::MatrixXd invert_block(Eigen::MatrixXd block, const int* idx, int k,
                             const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    block.diagonal().array() += 1e-8 * block.trace() / static_cast<double>(k);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() != Eigen::Success) {
    throw NumericError(std::string("singular ") + what + " covariance after shrinkage at " +
                       index_list(idx, k));
  }
  return llt.solve(Eigen::MatrixXd::Identity(k, k));
}

Precision assemble(const Eigen::MatrixXd& cov, const TmfgGraph& graph) {
  const int n = graph.n;
  if (cov.rows() != n || cov.cols() != n) {
    throw std::invalid_argument("covariance dimension does not match graph");
  }

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd block;
  for (const auto& c : graph.cliques) {
    block.resize(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) block(i, j) = cov(c[i], c[j]);
    }
    const Eigen::MatrixXd inv = invert_block(block, c.data(), 4, "clique");
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) J(c[i], c[j]) += inv(i, j);
    }
  }
  for (const auto& s : graph.separators) {
    block.resize(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) block(i, j) = cov(s[i], s[j]);
    }
    const Eigen::MatrixXd inv = invert_block(block, s.data(), 3, "separator");
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) J(s[i], s[j]) -= inv(i, j);
    }
  }

  Precision p;
  p.logdet = logdet_spd(J);  // Cholesky doubles as the PD check
  p.mat = std::move(J);
  return p;
}

}  // namespace

Precision logo_precision(const Eigen::MatrixXd& obs, const TmfgGraph& graph) {
  if (obs.cols() != graph.n) {
    throw std::invalid_argument("observation dimension does not match graph");
  }
  return assemble(sample_covariance(obs), graph);
}

Precision logo_precision_from_cov(const Eigen::MatrixXd& cov, const TmfgGraph& graph) {
  return assemble(cov, graph);
}

void write_precision(const Precision& p, const std::string& csv_path,
                     const std::string& json_path) {
  const int n = p.dim();
  std::ofstream csv(csv_path);
  if (!csv) throw DataError("cannot write '" + csv_path + "'");
  csv << "i,j,value\n";
  long support = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p.mat(i, j) != 0.0) {
        csv << i << ',' << j << ',' << format_double(p.mat(i, j)) << '\n';
        ++support;
      }
    }
  }
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["n"] = n;
  doc["logdet"] = p.logdet;
  doc["support_entries"] = support;
  std::ofstream js(json_path);
  if (!js) throw DataError("cannot write '" + json_path + "'");
  js << doc.dump(2) << '\n';
}

}  // namespace icc
