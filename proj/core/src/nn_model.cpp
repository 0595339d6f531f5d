#include "nnreach/nn_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nnreach/errors.hpp"
#include "nnreach/rng.hpp"

namespace nnreach {

using json = nlohmann::json;

Network::Network(std::vector<Layer> layers, Activation hidden)
    : layers_(std::move(layers)), hidden_(hidden) {
    if (layers_.empty()) throw ShapeError("network needs at least one layer");
    if (hidden_ != Activation::ReLU)
        throw ShapeError("only ReLU hidden activations are supported");
    dims_.push_back(layers_.front().weights.cols());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& lay = layers_[l];
        if (lay.weights.rows() == 0 || lay.weights.cols() == 0)
            throw ShapeError("empty weight matrix in layer " + std::to_string(l));
        if (lay.bias.size() != lay.weights.rows())
            throw ShapeError("bias length mismatch in layer " + std::to_string(l));
        if (lay.weights.cols() != dims_.back())
            throw ShapeError("layer " + std::to_string(l) + " input width " +
                             std::to_string(lay.weights.cols()) + " != previous output width " +
                             std::to_string(dims_.back()));
        if (!lay.weights.allFinite() || !lay.bias.allFinite())
            throw ShapeError("non-finite entry in layer " + std::to_string(l));
        dims_.push_back(lay.weights.rows());
    }
}

Vec Network::forward(const Vec& x) const {
    if (x.size() != input_dim())
        throw ShapeError("forward: input length " + std::to_string(x.size()) +
                         " != network input width " + std::to_string(input_dim()));
    Vec h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        h = layers_[l].weights * h + layers_[l].bias;
        if (l + 1 < layers_.size()) h = h.cwiseMax(0.0);
    }
    return h;
}

namespace {

Mat parse_matrix(const json& rows, const char* what) {
    if (!rows.is_array() || rows.empty()) throw FormatError(std::string(what) + ": expected non-empty array of rows");
    const std::size_t ncols = rows[0].size();
    Mat m(rows.size(), ncols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != ncols)
            throw FormatError(std::string(what) + ": ragged rows");
        for (std::size_t j = 0; j < ncols; ++j) {
            if (!rows[i][j].is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
            m(i, j) = rows[i][j].get<double>();
        }
    }
    return m;
}

Vec parse_vector(const json& arr, const char* what) {
    if (!arr.is_array()) throw FormatError(std::string(what) + ": expected array");
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
        v[i] = arr[i].get<double>();
    }
    return v;
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

}  // namespace

Network load_network(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("network document: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("network document: expected object");
    if (doc.value("format_version", -1) != 1)
        throw FormatError("network document: unsupported format_version");
    const std::string act = doc.value("activation", "");
    if (act != "relu") throw FormatError("network document: unknown activation '" + act + "'");
    if (!doc.contains("layers")) throw FormatError("network document: missing layers");

    std::vector<Layer> layers;
    for (const json& jl : doc["layers"]) {
        Layer lay;
        lay.weights = parse_matrix(jl.at("weights"), "weights");
        lay.bias = parse_vector(jl.at("bias"), "bias");
        layers.push_back(std::move(lay));
    }
    return Network(std::move(layers));  // constructor validates shapes/finiteness
}

std::string save_network(const Network& net) {
    json doc;
    doc["format_version"] = 1;
    doc["activation"] = "relu";
    json layers = json::array();
    for (const Layer& lay : net.layers()) {
        json jl;
        jl["weights"] = matrix_to_json(lay.weights);
        jl["bias"] = vector_to_json(lay.bias);
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(2);
}

Network load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open network file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_network(ss.str());
}

void save_network_file(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write network file: " + path);
    out << save_network(net) << "\n";
}

Network append_control_limits(const Network& net, const Vec& u_lo, const Vec& u_hi) {
    const Eigen::Index n = net.output_dim();
    if (u_lo.size() != n || u_hi.size() != n)
        throw ShapeError("append_control_limits: limit length != network output width");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(u_lo[i] < u_hi[i]))
            throw ShapeError("append_control_limits: u_lo >= u_hi at coordinate " +
                             std::to_string(i));

    // The old output layer becomes hidden once the clamp layers are appended,
    // so its two shifted copies must be folded into the final affine layer.
    std::vector<Layer> layers = net.layers();
    Layer last = layers.back();
    layers.pop_back();

    Layer stacked;
    stacked.weights.resize(2 * n, last.weights.cols());
    stacked.weights << last.weights, last.weights;
    stacked.bias.resize(2 * n);
    stacked.bias << last.bias - u_lo, last.bias - u_hi;
    layers.push_back(std::move(stacked));

    Layer collect;
    collect.weights.resize(n, 2 * n);
    collect.weights << Mat::Identity(n, n), -Mat::Identity(n, n);
    collect.bias = u_lo;
    layers.push_back(std::move(collect));

    return Network(std::move(layers));
}

Network random_network(const std::vector<Eigen::Index>& dims, std::uint64_t seed, double scale) {
    if (dims.size() < 2) throw ShapeError("random_network: need at least [n_in, n_out]");
    Rng rng(seed);
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer lay;
        const double s = scale / std::sqrt(static_cast<double>(dims[l]));
        lay.weights.resize(dims[l + 1], dims[l]);
        lay.bias.resize(dims[l + 1]);
        for (Eigen::Index i = 0; i < lay.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < lay.weights.cols(); ++j)
                lay.weights(i, j) = rng.uniform(-s, s);
        for (Eigen::Index i = 0; i < lay.bias.size(); ++i) lay.bias[i] = rng.uniform(-s, s);
        layers.push_back(std::move(lay));
    }
    return Network(std::move(layers));
}

}  // namespace nnreach
