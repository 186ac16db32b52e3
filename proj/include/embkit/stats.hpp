#pragma once

#include <span>
#include <vector>

namespace embkit {

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v); // n-1 denominator

// Pearson correlation; throws DegenerateError on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Average ranks with tie handling (ties share the mean of their rank block).
std::vector<double> average_ranks(std::span<const double> v);

// Spearman rank correlation = Pearson on average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

} // namespace embkit
