"""
Stability of a perturbed pair
=============================

Scale Psi by 1 + eps and ask whether the hypothesis with alpha = eps
holds. The certificate reports the sampled margin, the predicted
interval and the bounds actually achieved by the candidate.
"""

from bigframe import example_3_4, example_3_6
from bigframe.stability import StabilityParams, SubsetPolicy, certify_stability

for make in (example_3_4, example_3_6):
    base = make()
    print(make.__name__)
    for eps in (0.01, 0.1, 0.3):
        cert = certify_stability(base, base.phi, base.psi.scaled(1 + eps),
                                 StabilityParams(alpha=eps), SubsetPolicy("exhaustive"))
        print(f"  eps={eps:<5} verdict={cert.verdict} margin={cert.hypothesis_margin:+.2e}"
              f" predicted=({cert.predicted.lower:.4g}, {cert.predicted.upper:.4g})"
              f" achieved=({cert.achieved.lower:.4g}, {cert.achieved.upper:.4g})")

# understating alpha makes the sampled margin negative
base = example_3_4()
cert = certify_stability(base, base.phi, base.psi.scaled(1.2), StabilityParams(alpha=0.1))
print("understated alpha:", cert.verdict, f"{cert.hypothesis_margin:+.3g}")
print(cert.paper_lower_note)
