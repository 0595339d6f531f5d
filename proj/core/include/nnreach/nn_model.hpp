#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace nnreach {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class Activation { ReLU, Identity };

struct Layer {
    Mat weights;  // n_out x n_in
    Vec bias;     // n_out
};

// Feed-forward network: affine layers with ReLU between them and no
// activation after the last layer. Immutable after construction.
class Network {
public:
    explicit Network(std::vector<Layer> layers, Activation hidden = Activation::ReLU);

    Vec forward(const Vec& x) const;

    const std::vector<Layer>& layers() const { return layers_; }
    Activation hidden_activation() const { return hidden_; }

    // [n_0, n_1, ..., n_{L+1}]
    const std::vector<Eigen::Index>& dims() const { return dims_; }
    Eigen::Index input_dim() const { return dims_.front(); }
    Eigen::Index output_dim() const { return dims_.back(); }
    std::size_t num_hidden_layers() const { return layers_.size() - 1; }

private:
    std::vector<Layer> layers_;
    Activation hidden_;
    std::vector<Eigen::Index> dims_;
};

Network load_network(const std::string& text);
std::string save_network(const Network& net);
Network load_network_file(const std::string& path);
void save_network_file(const Network& net, const std::string& path);

// Returns a network computing clamp(f(x), u_lo, u_hi) exactly, realized as
// u_lo + ReLU(u - u_lo) - ReLU(u - u_hi) folded into two appended layers.
Network append_control_limits(const Network& net, const Vec& u_lo, const Vec& u_hi);

// Random network with layer widths `dims`, weights/biases uniform in
// [-scale, scale] per-entry scaled by 1/sqrt(fan_in). Used for seeded test
// corpora and shipped example nets.
Network random_network(const std::vector<Eigen::Index>& dims, std::uint64_t seed,
                       double scale = 2.0);

}  // namespace nnreach
