#pragma once

namespace tourexp::prob {

/// Regularized incomplete beta function I_x(a, b), a,b > 0, x in [0,1].
/// Continued-fraction evaluation, absolute accuracy around 1e-14.
double incbeta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided(double t, double df);

/// Upper-tail p-value of an F statistic with (df1, df2) degrees of freedom.
double f_upper_tail(double f, double df1, double df2);

}  // namespace tourexp::prob
