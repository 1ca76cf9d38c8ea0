#pragma once

namespace rsmkit {

// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
// separately keeps precision when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

// Student t and Fisher F distribution functions. df < 1 throws InvalidDf.
double t_cdf(double x, int df);
double t_two_sided_p(double t, int df);
double f_cdf(double x, int df1, int df2);
// Upper tail 1 - f_cdf, evaluated directly.
double f_sf(double x, int df1, int df2);

}  // namespace rsmkit
