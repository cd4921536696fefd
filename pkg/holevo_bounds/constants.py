##holevo_bounds.yml
tolerances = "tolerances"
hermitian = "hermitian"
trace = "trace"
psd_slack = "psd_slack"
kernel_threshold = "kernel_threshold"
anticomm_residual = "anticomm_residual"
qfi_pinv = "qfi_pinv"
commutator = "commutator"
d_invariance_rank = "d_invariance_rank"
lu_check = "lu_check"
heisenberg = "heisenberg"
degeneracy = "degeneracy"

# model
model = "model"
numeric_step = "numeric_step"
multi_copy_cap = "multi_copy_cap"

# hcr
hcr = "hcr"
sdp_dim_cap = "sdp_dim_cap"
s_clip = "s_clip"
cost_rank_threshold = "cost_rank_threshold"

# sdp
sdp = "sdp"
max_iters = "max_iters"
gap_tol = "gap_tol"
comp_tol = "comp_tol"
feas_tol = "feas_tol"
step = "step"
divergence = "divergence"
min_step = "min_step"

# bayes
bayes = "bayes"
quadrature_nodes = "quadrature_nodes"
quadrature_nodes_high_dim = "quadrature_nodes_high_dim"
covariant_nodes = "covariant_nodes"
covariant_min_nodes = "covariant_min_nodes"
covariant_max_copies = "covariant_max_copies"

# sim
sim = "sim"
chunk_size = "chunk_size"
threads = "threads"
seed = "seed"
min_trials = "min_trials"

# env
threads_env = "HOLEVO_THREADS"
