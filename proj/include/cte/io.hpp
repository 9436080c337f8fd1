#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cte/graph.hpp"

namespace cte {

/// Embedding CSV: header "node_id,c1,...,cd", one row per node, reals with
/// 17 significant digits.
void write_embedding_csv(const std::string& path, const Eigen::MatrixXd& coordinates,
                         const std::vector<std::string>& ids);

struct EmbeddingCsv {
    Eigen::MatrixXd coordinates;  // d x N, columns follow file row order
    std::vector<std::string> ids;
};
EmbeddingCsv read_embedding_csv(const std::string& path);

/// Loss trace CSV: "epoch,mean_loss".
void write_loss_csv(const std::string& path, const std::vector<double>& trace);

/// Plot export: "node_id,x,y[,z],label", taking the leading coordinates.
/// Nodes without a label are written as "unlabeled".
void write_plot_csv(const std::string& path, const Eigen::MatrixXd& coordinates,
                    const std::vector<std::string>& ids,
                    const std::vector<std::string>& labels, int dims);

/// Feature matrix from a headerless CSV, one vector per row.
std::vector<Eigen::VectorXd> read_feature_csv(const std::string& path);

/// Feature vectors from raw 8-bit grayscale images (one file per vector,
/// flattened row-major; all files must have equal size). `paths` order
/// defines the node order.
std::vector<Eigen::VectorXd> read_raw_image_features(const std::vector<std::string>& paths);

/// deterministic text formatting for doubles (17 significant digits)
std::string format_real(double value);

}  // namespace cte
