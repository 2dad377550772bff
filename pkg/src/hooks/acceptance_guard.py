"""Acceptance guard hook applying numerical thresholds to computed reports."""

from typing import Any, Dict, List

# residual thresholds
STATIONARY_RESIDUAL = 1e-8
GENERALIZED_RESIDUAL = 1e-6
KERR_RESIDUAL = 1e-6
DUAL_RESIDUAL = 1e-6

# relative tolerance of the pairing constants (absolute for an expected zero)
PAIRING_RELATIVE = 1e-5
PAIRING_ZERO = 1e-6

SLOPE_FRACTION = 0.1
TAIL_INDEX = -2.0
QNM_AGREEMENT = 1e-6
RINGDOWN_AGREEMENT = 0.01
ORDER_FRACTION = 0.1
# grid residual orders near round-off are noisy
ORDER_SLACK = 0.3


def _pairing_violations(rows: List[Dict], relative: float = PAIRING_RELATIVE) -> List[str]:
    violations = []
    for row in rows:
        expected = row['expected']
        computed = row['computed']
        if isinstance(computed, list):
            computed = complex(*computed)
        error = abs(computed - expected)
        limit = PAIRING_ZERO if expected == 0 else relative * abs(expected)
        if error > limit:
            violations.append(f"pairing {row['name']}: computed {computed} vs expected {expected} "
                              f"(error {error:.2e} > {limit:.1e})")
    return violations


def _verify_violations(rows: List[Dict]) -> List[str]:
    violations = []
    for row in rows:
        scheme = row.get('scheme')
        if row.get('operator') == 'box_kerr':
            if row['residual'] > KERR_RESIDUAL:
                violations.append(f"Kerr form {row['entry']}: residual {row['residual']:.2e}")
            continue
        if row.get('dual_residual', 0.0) > DUAL_RESIDUAL:
            violations.append(f"dual {row['entry']}: adjoint kernel residual {row['dual_residual']:.2e}")
        if scheme == 'ClosedFormDiff':
            limit = GENERALIZED_RESIDUAL if 'residual_linear' in row else STATIONARY_RESIDUAL
            worst = max(row['residual'], row.get('residual_linear', 0.0))
            if worst > limit:
                violations.append(f"entry {row['entry']} vs {row['operator']}: residual {worst:.2e} > {limit:.0e}")
        elif row.get('order_estimate') is not None and row.get('nominal_order'):
            nominal = row['nominal_order']
            if row['order_estimate'] < nominal * (1 - ORDER_SLACK):
                violations.append(f"entry {row['entry']} ({scheme}): observed order "
                                  f"{row['order_estimate']:.2f} below nominal {nominal}")
    return violations


def check_report(report: Dict[str, Any]) -> List[str]:
    """
    Check a computed report against the acceptance thresholds.

    Args:
        report: Report dict with a 'kind' key (pairings, verify, scan, qnm, cd-track, evolve)

    Returns:
        List of violation messages (empty if the report passes)
    """
    kind = report.get('kind')
    violations = []

    if kind == 'pairings':
        violations += _pairing_violations(report.get('rows', []), report.get('tolerance', PAIRING_RELATIVE))

    elif kind == 'verify':
        violations += _verify_violations(report.get('rows', []))

    elif kind == 'scan':
        if not report.get('passed', False):
            mode = report.get('mode')
            where = f" (candidate mode at {mode})" if mode else ''
            violations.append(f"scan of {report.get('problem')}: min normalized Wronskian "
                              f"{report.get('min_normalized_wronskian'):.2e} below threshold "
                              f"{report.get('threshold'):.1e}{where}")

    elif kind == 'qnm':
        oracle = report.get('oracle')
        sigma = report.get('sigma')
        if oracle is not None and sigma is not None:
            diff = max(abs(sigma[0] - oracle[0]), abs(sigma[1] - oracle[1]))
            if diff > QNM_AGREEMENT:
                violations.append(f"QNM {sigma} disagrees with the continued fraction {oracle} by {diff:.2e}")
        if sigma is not None and sigma[1] >= 0:
            violations.append(f"QNM {sigma} is not damped")

    elif kind == 'cd-track':
        if not report.get('all_damped', False):
            violations.append("constraint-damping root is not in the lower half plane for every gamma")
        slope, predicted = report.get('slope'), report.get('predicted_slope')
        if slope is not None and predicted is not None:
            gap = abs(complex(*slope) - complex(*predicted))
            limit = SLOPE_FRACTION * abs(complex(*predicted))
            if gap > limit:
                violations.append(f"constraint-damping slope {slope} misses {predicted} by {gap:.3f} > {limit:.3f}")

    elif kind == 'evolve':
        tail = report.get('tail')
        if tail is not None and tail.get('power') is not None and tail['power'] > TAIL_INDEX:
            violations.append(f"tail power {tail['power']:.2f} exceeds {TAIL_INDEX}")
        order, nominal = report.get('convergence_order'), report.get('nominal_order')
        if order is not None and nominal and abs(order - nominal) > ORDER_FRACTION * nominal:
            violations.append(f"self-convergence order {order:.2f} is not within 10% of {nominal}")
        ringdown, qnm = report.get('ringdown'), report.get('qnm')
        if ringdown is not None and qnm is not None:
            rel = abs(complex(*ringdown) - complex(*qnm)) / abs(complex(*qnm))
            if rel > RINGDOWN_AGREEMENT:
                violations.append(f"ringdown fit {ringdown} differs from the QNM {qnm} by {rel:.1%}")
        if report.get('energy_growing'):
            violations.append("discrete energy grows after the initial transient")

    elif kind is None:
        violations.append("report has no 'kind'")

    return violations


def acceptance_guard_hook(kind: str, report: Dict[str, Any]) -> Dict[str, Any]:
    """
    Post-computation hook deciding whether a report passes.

    Args:
        kind: Workflow name
        report: The report dict

    Returns:
        Dictionary with 'allow' boolean and optional 'message'
    """
    if kind == 'potential':
        return {'allow': True}

    violations = check_report({'kind': kind, **report})
    if violations:
        message = "\n".join(f"  - {v}" for v in violations)
        return {'allow': False, 'message': f"ACCEPTANCE VIOLATIONS:\n{message}"}
    return {'allow': True}


def get_acceptance_hooks() -> Dict[str, Any]:
    """
    Get hook configuration for acceptance guards.

    Returns:
        Dictionary with hook configuration
    """
    return {
        'preWrite': [],
        'postCompute': [acceptance_guard_hook]
    }
