#pragma once

#include <komega/sweep.hpp>

#include <string>

namespace komega::csv {

// Shortest decimal form that parses back to the same double ("C" locale,
// printf %g style).  Keeps the files exact without drowning them in digits.
std::string format_real(double x);

// a,omega,N,K and one label column per scheme; rows in (a, omega, N) order.
std::string render_results(const sweep::SweepResult& result);

// N,scheme,Q_u,Q_u_prime,Q_min,Q_min_prime; one row per summary entry.
std::string render_summary(const sweep::SweepResult& result);

// a,N,M_u_percent under the chosen scheme: the share of undecided
// frequencies per parameter, in percent.
std::string render_outliers(const sweep::SweepResult& result, std::size_t scheme_index);

// a,N,median_K: the median fitted exponent over the frequency draws.
std::string render_median(const sweep::SweepResult& result);

// N,n,log_n,log_D plus one 0/1 column per delta marking whether the lag
// falls inside that regression range.
std::string render_probe(const sweep::ProbeTable& table);

void write_file(const std::string& path, const std::string& content);

}  // namespace komega::csv
