#pragma once

namespace bimr {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile. Rational approximation refined by one Halley
/// step; absolute error well below 1e-9 on (0,1). Throws DomainError outside.
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Chi-square quantile with df degrees of freedom, via the inverse of
/// P(df/2, x/2) (Newton with bisection safeguard). df > 0, p in (0,1).
double chi2_quantile(int df, double p);

}  // namespace bimr
