"""Walk every measurement branch of the GHZ preparation circuits."""

from multitrace.circuit import quantum_depth
from multitrace.ghz import build_method1, build_method2, verify_ghz
from multitrace.statevector import StateVector, enumerate_branches

for plan in (build_method1(4), build_method2(6)):
    name = f"method {plan.method}, {plan.parties} parties on {plan.num_qubits} qubits"
    print(name, "depth", quantum_depth(plan.circuit))
    for br in enumerate_branches(plan.circuit):
        fid = verify_ghz(StateVector(plan.num_qubits, br.amplitudes), plan.ghz_qubits)
        print(f"  outcomes {br.record}  weight {br.weight:.3f}  fidelity {fid:.12f}")
