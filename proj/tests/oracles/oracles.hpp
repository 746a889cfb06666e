#pragma once

// Reference evaluators used only by tests. They follow the defining formulas
// literally (naive exponentials, explicit loops, brute-force threshold sweeps)
// and share no code with the library's implementations.

#include <cstdint>
#include <random>
#include <vector>

#include "aamsupcon/losses.hpp"
#include "aamsupcon/matrix.hpp"

namespace oracle {

using aamsupcon::Label;
using aamsupcon::Matrix;

/// sum_i -1/|P(i)| sum_p log( exp(z_i.z_p/t) / sum_a exp(z_i.z_a/t) ),
/// with P and A rebuilt here from the labels.
double supcon(const Matrix& z, const std::vector<Label>& labels, double temperature,
              bool strict_negatives);

/// -1/N sum_i log( e^{s cos(th_y + m)} / (e^{s cos(th_y + m)} + sum_{j != y} e^{s cos th_j}) )
/// using std::acos / std::cos directly, shifted angle capped at pi.
double arcface(const Matrix& z, const std::vector<Label>& labels, const Matrix& w, double scale,
               double margin);

double softmax_xent(const Matrix& z, const std::vector<Label>& labels, const Matrix& w, double scale);

/// EER by brute force: for every candidate threshold (each distinct score and
/// +inf) count misses and false alarms directly, then interpolate linearly
/// between the last point with FRR < FAR and the first with FRR >= FAR.
double eer(const std::vector<double>& scores, const std::vector<bool>& is_target);

/// Normalized minDCF by enumerating -inf, every observed score and +inf.
double min_dcf(const std::vector<double>& scores, const std::vector<bool>& is_target,
               double p_target, double c_miss, double c_fa);

// Generators.
Matrix random_unit_rows(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
/// Labels in [0, classes) where every class that appears does so at least twice.
std::vector<Label> random_paired_labels(std::size_t n, std::size_t classes, std::mt19937_64& rng);

aamsupcon::LossInputs random_inputs(std::size_t n, std::size_t d, std::size_t classes,
                                    std::mt19937_64& rng);

}  // namespace oracle
