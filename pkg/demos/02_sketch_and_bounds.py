"""One sketch, its error, and the tail bound at several t.

Run: python demos/02_sketch_and_bounds.py
"""

from ammsketch import certificate, proof_form_tail, relative_spectral_error, sketch, tail_bound
from ammsketch.harness import MatrixSpec, make_pair

P = make_pair(MatrixSpec(d_a=16, d_b=16, n=512, sr_a=4.0, sr_b=4.0, seed=7))
cert = certificate(P)
print(f"sr(A) = {cert.sr_a:.4f}, sr(B) = {cert.sr_b:.4f}")
print(f"b_bar = {cert.b_bar:.4f}, sigma2_bar = {cert.sigma2_bar:.4f}, k_bar = {cert.k_bar:.4f}")

for m in (256, 1024, 4096):
    est = sketch(P, "proposed", m, seed=0)
    err = relative_spectral_error(est, P)
    print(f"\nm = {m}: relative spectral error {err:.4f}")
    for t in (3.0, 5.0, 8.0):
        th, pf = tail_bound(cert, m, t), proof_form_tail(cert, m, t)
        print(f"  t = {t}: deviation {th.deviation:.4f} (proof form {pf.deviation:.4f}), "
              f"failure prob {th.failure_prob:.4f}{'  [vacuous]' if th.vacuous else ''}")
