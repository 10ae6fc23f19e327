"""Print the step-by-step grid schedule for five states of four qubits each."""

from multitrace.grid import build_grid_estimation, render_schedule, schedule

ec, lay = build_grid_estimation(5, 4)
s = schedule(ec.circuit, lay)
print(f"{lay.rows} x {lay.cols} grid, {lay.num_qubits} qubits, {s.panel_count} panels")
print(render_schedule(s))
