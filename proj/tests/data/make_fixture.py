#!/usr/bin/env python3
"""Regenerates fixture_prices.csv and prints the reference metric rows.

The fixture is a deterministic two-asset daily price panel (8 blocks of 21
trading days). The reference numbers printed by this script are computed
directly from the documented strategy and metric definitions, independently
of the C++ implementation, and are frozen into the unit tests:

  buy-and-hold: the wealth is split equally across assets at every step;
  index:        the wealth is split equally once, then positions ride.

  ledger step:  turnover = sum_i |target_i - drifted_i|
                W' = W + sum_i target_i * ret_i - tc * turnover
                drifted' = target * (1 + ret)

  metrics:      daily net return (W'-W)/W, gross adds back tc*turnover/W;
                compound blocks of 21 days into monthly returns; MEAN/STD
                (ddof=1) over months; CEQ = 12 (MEAN - gamma STD^2);
                SR = sqrt(12) (MEAN - r/12)/STD; TR = mean of turnover/W over
                all steps after the entry trade; the _TR variants repeat CEQ
                and SR on the net (cost-bearing) returns.
"""
import math
import os

MONTH = 21
MONTHS = 8
STEPS = MONTH * MONTHS
GAMMA = 1.5
TC = 0.003
RATE = 0.02
W0 = 1.0


def prices(k):
    p1 = 100.0 * math.exp(0.0009 * k + 0.05 * math.sin(2.0 * math.pi * k / 34.0))
    p2 = 50.0 * math.exp(0.0004 * k - 0.06 * math.cos(2.0 * math.pi * k / 55.0) + 0.06)
    return p1, p2


def write_csv(path):
    import datetime
    d0 = datetime.date(2010, 1, 1)
    with open(path, "w") as f:
        f.write("date,asset_1,asset_2\n")
        for k in range(STEPS + 1):
            p1, p2 = prices(k)
            f.write("%s,%.17g,%.17g\n" % ((d0 + datetime.timedelta(days=k)).isoformat(), p1, p2))


def returns():
    out = []
    for k in range(STEPS):
        a = prices(k)
        b = prices(k + 1)
        out.append(tuple((b[i] - a[i]) / a[i] for i in range(2)))
    return out


def run(strategy, rets, tc):
    W = W0
    drifted = [0.0, 0.0]
    wealth = [W]
    turnover = []
    for k, r in enumerate(rets):
        if strategy == "bh" or k == 0:
            target = [W / 2.0, W / 2.0]
        else:
            target = list(drifted)
        t = sum(abs(target[i] - drifted[i]) for i in range(2))
        W = W + sum(target[i] * r[i] for i in range(2)) - tc * t
        drifted = [target[i] * (1.0 + r[i]) for i in range(2)]
        wealth.append(W)
        turnover.append(t)
    return wealth, turnover


def metrics(wealth, turnover, tc):
    S = len(turnover)
    net = [(wealth[k + 1] - wealth[k]) / wealth[k] for k in range(S)]
    gross = [net[k] + tc * turnover[k] / wealth[k] for k in range(S)]

    def monthly(daily):
        out = []
        for m in range(S // MONTH):
            acc = 1.0
            for k in range(m * MONTH, (m + 1) * MONTH):
                acc *= 1.0 + daily[k]
            out.append(acc - 1.0)
        return out

    def mean_std(xs):
        mu = sum(xs) / len(xs)
        var = sum((x - mu) ** 2 for x in xs) / (len(xs) - 1)
        return mu, math.sqrt(var)

    gm, gs = mean_std(monthly(gross))
    nm, ns = mean_std(monthly(net))
    ceq = 12.0 * (gm - GAMMA * gs * gs)
    sr = math.sqrt(12.0) * (gm - RATE / 12.0) / gs
    ceq_tr = 12.0 * (nm - GAMMA * ns * ns)
    sr_tr = math.sqrt(12.0) * (nm - RATE / 12.0) / ns
    tr = sum(turnover[k] / wealth[k] for k in range(1, S)) / (S - 1)
    return gm, gs, ceq, sr, tr, ceq_tr, sr_tr


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    write_csv(os.path.join(here, "fixture_prices.csv"))
    rets = returns()
    for name, tag in (("bh", "buy-hold"), ("index", "index")):
        wealth, turnover = run(name, rets, TC)
        row = metrics(wealth, turnover, TC)
        print("%s terminal_wealth %.12g" % (tag, wealth[-1]))
        print("%s mean %.12g std %.12g ceq %.12g sr %.12g tr %.12g ceq_tr %.12g sr_tr %.12g"
              % ((tag,) + row))


if __name__ == "__main__":
    main()
