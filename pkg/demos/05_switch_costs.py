"""Compare the modeled per-packet cost of each primitive role on the diversity stream."""
from ncswitch.experiments import SweepSpec, diversity_bench, role_means

table = diversity_bench(SweepSpec("diversity-bench", values=(1024, 4096), packets=300, differentials_ms=(-2, 2)))
for (size, role, branch), ns in sorted(role_means(table).items()):
    print(f"{size:>5} B  {role:<11} {branch:<13} {ns:>8.1f} ns")
print("\nthe decoder takes the arithmetic branch when the parity path is faster than a data path;"
      "\notherwise originals arrive first and pass straight through.")
