"""Reference implementations used only by tests.

Deliberately naive: pure-Python loops over full state tables, no numpy and
no code shared with the package.
"""
import itertools
import math


def _p_one(coefs, values):
    eta = 0.0
    for term, c in coefs.items():
        eta += c if term == "intercept" else c * values[term]
    return 1.0 / (1.0 + math.exp(-eta))


def joint_table(equations, variables, inputs):
    """Map every 0/1 assignment of ``variables`` to its probability.

    ``equations`` maps each variable to its ``{term: coef}`` dictionary;
    ``inputs`` holds the fixed factor and covariate values.
    """
    table = {}
    for states in itertools.product((0, 1), repeat=len(variables)):
        values = dict(inputs)
        values.update(zip(variables, states))
        prob = 1.0
        for var in variables:
            p1 = _p_one(equations[var], values)
            prob *= p1 if values[var] == 1 else 1.0 - p1
        table[states] = prob
    return table


def conditional(equations, variables, inputs, target, condition):
    table = joint_table(equations, variables, inputs)
    t = variables.index(target)
    num = den = 0.0
    for states, prob in table.items():
        if all(states[variables.index(k)] == v for k, v in condition.items()):
            den += prob
            if states[t] == 1:
                num += prob
    return num / den


def central_gradient(f, x, h=1e-5):
    g = []
    for k in range(len(x)):
        up = list(x)
        dn = list(x)
        up[k] += h
        dn[k] -= h
        g.append((f(up) - f(dn)) / (2 * h))
    return g


def pairwise_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))
