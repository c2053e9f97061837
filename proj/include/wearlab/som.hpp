#ifndef WEARLAB_SOM_HPP
#define WEARLAB_SOM_HPP

#include "wearlab/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wearlab {

enum class SomInit { RandomSample, LinearSpan };

SomInit som_init_by_name(const std::string& name);
std::string som_init_name(SomInit init);

struct SomConfig {
    int rows = 6;
    int cols = 6;
    int epochs = 200;
    double initial_radius = 3.0;  // defaults to max(rows, cols) / 2 below
    double final_radius = 1.0;
    SomInit init = SomInit::RandomSample;
    std::uint64_t seed = 0;

    static SomConfig with_grid(int rows, int cols);
    void validate() const;
};

// One neuron's place on the hexagonal grid: axial lattice coordinates plus
// the Euclidean plane position used for neighborhoods and rendering
// (unit spacing between adjacent neurons).
struct HexNeuron {
    int row = 0;
    int col = 0;
    int q = 0;  // axial
    int r = 0;  // axial
    double x = 0.0;
    double y = 0.0;
};

struct SomModel {
    Eigen::MatrixXd weights;       // (rows*cols) x d
    std::vector<HexNeuron> grid;   // size rows*cols, row-major
    int rows = 0;
    int cols = 0;
    int trained_epochs = 0;

    int neuron_count() const { return rows * cols; }
};

struct UMatrixEdge {
    int a = 0;  // neuron indices, a < b
    int b = 0;
    double distance = 0.0;  // Euclidean distance between weight vectors
};

// Distances between hex-neighboring neurons; large values mark cluster
// boundaries on the map.
struct UMatrix {
    std::vector<UMatrixEdge> edges;
    std::vector<double> neuron_mean;  // mean over incident edges, 0 if none
};

// Grid topology helpers (independent of training).
std::vector<HexNeuron> hex_grid(int rows, int cols);
bool hex_adjacent(const HexNeuron& a, const HexNeuron& b);

// Training schedule: linear radius decay from initial_radius to final_radius
// across cfg.epochs, and the Gaussian neighborhood kernel
// h = exp(-d^2 / (2 r^2)) with h(0) = 1.
double som_radius(const SomConfig& cfg, int epoch);
double som_neighborhood(double grid_dist, double radius);

// Weight initialization. RandomSample draws each weight uniformly from data
// rows; LinearSpan spreads the grid over the first two principal axes.
SomModel som_init(const FeatureMatrix& m, const SomConfig& cfg);

// Best-matching unit: index of the weight vector nearest to x in Euclidean
// distance, ties to the lowest index.
int bmu(const SomModel& model, const Eigen::VectorXd& x);

// Batch training: per epoch every row is assigned to its BMU and each
// neuron's weight becomes the neighborhood-weighted mean of all rows with
// h = exp(-plane_dist^2 / (2 radius^2)). The radius decays linearly from
// initial_radius to final_radius over the epochs. Neurons receiving zero
// total neighborhood mass keep their previous weight.
SomModel som_train(const SomModel& model, const FeatureMatrix& m,
                   const SomConfig& cfg);

// One edge per hex-adjacent neuron pair plus per-neuron means.
UMatrix u_matrix(const SomModel& model);

// Number of rows whose BMU is each neuron; sums to n.
std::vector<std::int64_t> sample_hits(const SomModel& model,
                                      const FeatureMatrix& m);

// Mean Euclidean distance from rows to their BMU weights.
double quantization_error(const SomModel& model, const FeatureMatrix& m);

}  // namespace wearlab

#endif  // WEARLAB_SOM_HPP
