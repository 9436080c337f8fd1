#include "cte/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cte {

std::string format_real(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_embedding_csv(const std::string& path, const Eigen::MatrixXd& coordinates,
                         const std::vector<std::string>& ids) {
    if (static_cast<Eigen::Index>(ids.size()) != coordinates.cols())
        throw_dimension("write_embedding_csv: id count != embedding columns");
    std::ofstream out(path);
    if (!out) throw_io("cannot write embedding CSV: " + path);
    out << "node_id";
    for (Eigen::Index d = 0; d < coordinates.rows(); ++d) out << ",c" << (d + 1);
    out << '\n';
    for (Eigen::Index n = 0; n < coordinates.cols(); ++n) {
        out << ids[static_cast<std::size_t>(n)];
        for (Eigen::Index d = 0; d < coordinates.rows(); ++d)
            out << ',' << format_real(coordinates(d, n));
        out << '\n';
    }
    if (!out) throw_io("failed writing embedding CSV: " + path);
}

EmbeddingCsv read_embedding_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open embedding CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw_parse("embedding CSV is empty: " + path);
    std::size_t dims = 0;
    for (char c : line)
        if (c == ',') ++dims;
    if (dims == 0) throw_parse("embedding CSV header has no coordinate columns: " + path);

    EmbeddingCsv out;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream iss(line);
        std::string field;
        if (!std::getline(iss, field, ',')) continue;
        out.ids.push_back(field);
        std::vector<double> coords;
        coords.reserve(dims);
        while (std::getline(iss, field, ',')) {
            try {
                coords.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw_parse("embedding CSV line " + std::to_string(line_no) + ": bad real '" +
                            field + "'");
            }
        }
        if (coords.size() != dims)
            throw_parse("embedding CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dims) + " coordinates, got " +
                        std::to_string(coords.size()));
        rows.push_back(std::move(coords));
    }
    if (rows.empty()) throw_parse("embedding CSV has no data rows: " + path);
    out.coordinates.resize(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t n = 0; n < rows.size(); ++n)
        for (std::size_t d = 0; d < dims; ++d)
            out.coordinates(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) =
                rows[n][d];
    return out;
}

void write_loss_csv(const std::string& path, const std::vector<double>& trace) {
    std::ofstream out(path);
    if (!out) throw_io("cannot write loss CSV: " + path);
    out << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e)
        out << e << ',' << format_real(trace[e]) << '\n';
    if (!out) throw_io("failed writing loss CSV: " + path);
}

void write_plot_csv(const std::string& path, const Eigen::MatrixXd& coordinates,
                    const std::vector<std::string>& ids,
                    const std::vector<std::string>& labels, int dims) {
    if (dims != 2 && dims != 3) throw_domain("write_plot_csv: dims must be 2 or 3");
    if (coordinates.rows() < dims)
        throw_dimension("write_plot_csv: embedding dimension " +
                        std::to_string(coordinates.rows()) + " is below requested " +
                        std::to_string(dims));
    std::ofstream out(path);
    if (!out) throw_io("cannot write plot CSV: " + path);
    out << (dims == 2 ? "node_id,x,y,label" : "node_id,x,y,z,label") << '\n';
    for (Eigen::Index n = 0; n < coordinates.cols(); ++n) {
        out << ids[static_cast<std::size_t>(n)];
        for (int d = 0; d < dims; ++d) out << ',' << format_real(coordinates(d, n));
        const std::string& label =
            labels.empty() ? std::string() : labels[static_cast<std::size_t>(n)];
        out << ',' << (label.empty() ? "unlabeled" : label) << '\n';
    }
    if (!out) throw_io("failed writing plot CSV: " + path);
}

std::vector<Eigen::VectorXd> read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open feature CSV: " + path);
    std::vector<Eigen::VectorXd> vectors;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> values;
        std::istringstream iss(line);
        std::string field;
        while (std::getline(iss, field, ',')) {
            try {
                values.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw_parse("feature CSV line " + std::to_string(line_no) + ": bad real '" +
                            field + "'");
            }
        }
        if (values.empty()) continue;
        Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
        vectors.push_back(std::move(v));
    }
    return vectors;
}

std::vector<Eigen::VectorXd> read_raw_image_features(const std::vector<std::string>& paths) {
    std::vector<Eigen::VectorXd> vectors;
    vectors.reserve(paths.size());
    std::size_t expected = 0;
    for (const std::string& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw_io("cannot open image file: " + path);
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
        if (bytes.empty()) throw_parse("image file is empty: " + path);
        if (expected == 0) expected = bytes.size();
        if (bytes.size() != expected)
            throw_dimension("image file " + path + " has " + std::to_string(bytes.size()) +
                            " bytes; expected " + std::to_string(expected));
        Eigen::VectorXd v(static_cast<Eigen::Index>(bytes.size()));
        for (std::size_t i = 0; i < bytes.size(); ++i)
            v[static_cast<Eigen::Index>(i)] = static_cast<double>(bytes[i]);
        vectors.push_back(std::move(v));
    }
    return vectors;
}

}  // namespace cte
