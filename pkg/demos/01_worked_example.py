"""Build the (6, 3, 4) code with two cooperating failures and look at its pieces.

Run: python3 demos/01_worked_example.py
"""
from coopmsr import build_descriptor, check_flr, create_field, derive_params, verify_mds
from coopmsr.linalg import dump_hex

gf = create_field(4)
params = derive_params(6, 3, 4, [2])
print(f"s={params.s}  rho={params.rho}  ell_tilde={params.ell_tilde}  ell={params.ell}  m={params.m}")

# lambda_t = w^t and gamma = 1/(1+w), so every one of the twelve points is distinct
lam = [gf.pow(2, t) for t in range(12)]
desc = build_descriptor(params, lam=lam, gamma=gf.inv(gf.add(1, 2)))
print("distinctness condition holds:", check_flr(params, desc.lam, desc.gamma))

# one layer of node 0's parity block: 24 rows (r * ell_tilde) by 8 columns
print("parity block of node 0, layer 0:")
print(dump_hex(desc.parity_blocks[0]))

report = verify_mds(desc)
print(f"MDS: {report.checked} subsets of 3 checked, passed={report.passed}")

# the automatic search picks its own gamma and still satisfies the condition
auto = build_descriptor(params)
print(f"auto-selected gamma = {auto.gamma:#x}")
