#!/usr/bin/env python3
"""Regenerates tests/unit/oracle_data.hpp from scipy/numpy reference implementations.

Usage: python3 tests/oracles/gen_oracles.py > tests/unit/oracle_data.hpp
"""
import numpy as np
from scipy import optimize, stats


def f(x):
    return "%.17g" % x


def arr(xs):
    return "{" + ", ".join(f(x) for x in xs) + "}"


LICENSE_HEADER = """\
// Copyright 2026 The JNDQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
"""

rng = np.random.default_rng(20261015)
out = [LICENSE_HEADER]
out.append("// Generated by tests/oracles/gen_oracles.py; do not edit by hand.")
out.append("#pragma once\n\n#include <vector>\n\nnamespace oracle {\n")

out.append("struct StatCase {\n  std::vector<double> x, y;\n  double pcc, srcc, rmse;\n};\n")
out.append("inline const std::vector<StatCase>& stat_cases() {\n  static const std::vector<StatCase> cases = {")
for i in range(100):
    n = int(rng.integers(3, 31))
    x = rng.normal(3.0, 1.0, n)
    y = 0.6 * x + rng.normal(0.0, 0.8, n)
    if i % 4 == 1:  # ties exercise average ranking
        x = np.round(x * 2) / 2
        y = np.round(y)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        y = y + np.arange(n) * 0.01
    r = stats.pearsonr(x, y)[0]
    s = stats.spearmanr(x, y)[0]
    e = float(np.sqrt(np.mean((x - y) ** 2)))
    out.append("    {%s,\n     %s,\n     %s, %s, %s}," % (arr(x), arr(y), f(r), f(s), f(e)))
out.append("  };\n  return cases;\n}\n")

# Fisher z on correlation pairs: (r1, n1, r2, n2, z, p_two, p_one)
out.append("struct ZCase {\n  double r1; int n1; double r2; int n2; double z, p_two, p_one;\n};\n")
out.append("inline const std::vector<ZCase>& z_cases() {\n  static const std::vector<ZCase> cases = {")
zpairs = [(.968, 12, .751, 12), (.958, 12, .732, 12), (.958, 12, .860, 12), (.972, 12, .905, 12),
          (.980, 12, .920, 12), (.965, 12, .846, 12), (.953, 12, .955, 12), (.5, 30, .2, 40), (-.3, 50, .4, 25)]
for r1, n1, r2, n2 in zpairs:
    z = (np.arctanh(r1) - np.arctanh(r2)) / np.sqrt(1 / (n1 - 3) + 1 / (n2 - 3))
    out.append("    {%s, %d, %s, %d, %s, %s, %s}," % (f(r1), n1, f(r2), n2, f(z), f(2 * stats.norm.sf(abs(z))),
                                                     f(stats.norm.sf(z))))
out.append("  };\n  return cases;\n}\n")

# F test on RMSE pairs: (e1, n1, e2, n2, F, df_num, df_den, p)
out.append("struct FCase {\n  double e1; int n1; double e2; int n2; double f; int df_num, df_den; double p;\n};\n")
out.append("inline const std::vector<FCase>& f_cases() {\n  static const std::vector<FCase> cases = {")
fpairs = [(.326, 12, .758, 12), (.364, 12, .449, 12), (.301, 12, .480, 12), (.353, 12, .349, 12), (.5, 20, .4, 10),
          (.2, 8, .9, 30)]
for e1, n1, e2, n2 in fpairs:
    if e1 >= e2:
        F, d1, d2 = e1 ** 2 / e2 ** 2, n1 - 1, n2 - 1
    else:
        F, d1, d2 = e2 ** 2 / e1 ** 2, n2 - 1, n1 - 1
    out.append("    {%s, %d, %s, %d, %s, %d, %d, %s}," % (f(e1), n1, f(e2), n2, f(F), d1, d2, f(stats.f.sf(F, d1, d2))))
out.append("  };\n  return cases;\n}\n")

# Binomial upper tails P(X >= k), X ~ Bin(n, p)
out.append("struct BinomCase {\n  int n, k; double p, tail;\n};\n")
out.append("inline const std::vector<BinomCase>& binom_cases() {\n  static const std::vector<BinomCase> cases = {")
for n, k, p in [(4, 1, .5), (4, 2, .5), (4, 3, .5), (4, 4, .5), (4, 3, .83), (4, 4, .97), (10, 7, .61), (4, 0, .3)]:
    out.append("    {%d, %d, %s, %s}," % (n, k, f(p), f(stats.binom.sf(k - 1, n, p))))
out.append("  };\n  return cases;\n}\n")


# Psychometric function and its sqrt(.5) crossing
def pc(d, mu, s, g, l):
    return g + (1 - g - l) / (1 + np.exp(-(d - mu) / s))


out.append("struct PsyCase {\n  double mu, sigma, guess, lapse, delta, p, convergence;\n};\n")
out.append("inline const std::vector<PsyCase>& psy_cases() {\n  static const std::vector<PsyCase> cases = {")
for mu, s, g, l, d in [(10, 1, .5, .02, 8), (10, 1, .5, .02, 10), (9.86, 1, .5, .02, 12), (12.4, 2, .5, .02, 6),
                       (6, .5, .33, .0, 7), (8, 1.5, 0, .05, 8)]:
    c = optimize.brentq(lambda x: pc(x, mu, s, g, l) - np.sqrt(.5), mu - 50, mu + 50, xtol=1e-14)
    out.append("    {%s, %s, %s, %s, %s, %s, %s}," % (f(mu), f(s), f(g), f(l), f(d), f(pc(d, mu, s, g, l)), f(c)))
out.append("  };\n  return cases;\n}\n")

# Golden group comparison: twelve conditions, lab MOS plus passed/failed group MOS.
lab = np.array([4.4, 1.6, 2.1, 2.7, 3.2, 1.3, 3.8, 3.6, 3.0, 2.3, 1.9, 4.0])
passed = lab + np.array([.1, .3, .2, .1, -.2, .2, .0, -.1, .2, .1, .3, -.3])
failed = lab + np.array([-.3, 1.1, .9, .6, .2, .7, -.2, -.4, .3, .5, .9, -.6])
def metrics(a):
    return stats.pearsonr(a, lab)[0], stats.spearmanr(a, lab)[0], float(np.sqrt(np.mean((a - lab) ** 2)))
mp, mf = metrics(passed), metrics(failed)
def zt(r1, r2):
    z = (np.arctanh(r1) - np.arctanh(r2)) / np.sqrt(2 / 9)
    return z, 2 * stats.norm.sf(abs(z))
zp, zs = zt(mp[0], mf[0]), zt(mp[1], mf[1])
F = max(mp[2], mf[2]) ** 2 / min(mp[2], mf[2]) ** 2
out.append("struct Golden {\n  std::vector<double> lab, passed, failed;\n  double pcc_p, srcc_p, rmse_p, pcc_f, srcc_f, rmse_f;\n"
           "  double z_pcc, p_pcc, z_srcc, p_srcc, f_rmse, p_rmse;\n};\n")
out.append("inline const Golden& golden() {\n  static const Golden g = {%s,\n    %s,\n    %s,\n    %s, %s, %s, %s, %s, %s,\n"
           "    %s, %s, %s, %s, %s, %s};\n  return g;\n}\n" % (
               arr(lab), arr(passed), arr(failed), *map(f, mp), *map(f, mf), f(zp[0]), f(zp[1]), f(zs[0]), f(zs[1]),
               f(F), f(stats.f.sf(F, 11, 11))))

out.append("}  // namespace oracle")
print("\n".join(out))
