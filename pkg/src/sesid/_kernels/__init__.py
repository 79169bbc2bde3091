"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
pure NumPy/Python fallback is used.  Set ``SESID_PURE_PYTHON=1`` to force the
fallback (useful for benchmarking and debugging).
"""
import os

if os.environ.get("SESID_PURE_PYTHON"):
    from . import pyloop as impl
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pyloop as impl

BACKEND = impl.BACKEND

partition_index = impl.partition_index
basis_scalar = impl.basis_scalar
eta_matrix = impl.eta_matrix
cpl_eval_many = impl.cpl_eval_many
simulate_dttdl_cpl = impl.simulate_dttdl_cpl
rls_solve = impl.rls_solve
integrate_van_der_pol = impl.integrate_van_der_pol
integrate_lotka_volterra = impl.integrate_lotka_volterra
