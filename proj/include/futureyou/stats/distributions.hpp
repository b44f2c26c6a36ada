#pragma once

namespace futureyou::stats {

double normal_cdf(double x);
double normal_sf(double x);

double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);

double f_cdf(double x, double df1, double df2);
double f_sf(double x, double df1, double df2);

// P(range of k iid standard normals <= w), the df = infinity case.
double normal_range_cdf(double w, int k);

// Studentized range distribution P(Q <= q) for k groups and `df` error
// degrees of freedom. Absolute error below 1e-8 for k <= 100.
double ptukey(double q, int k, double df);

}  // namespace futureyou::stats
