
# uncomment the experiments you want to run
# plots generated by the experiments are put in the plots folder

# packet normalization, isometry, Hardy norms at p = 2 and norm independence
# from experiments import transform_experiments

# ball volumes and the quasi-metric
# from experiments import metric_experiments

# off-singularity fits and residual tables of lifted kernels
# from experiments import kernel_experiments

# Sobolev embeddings, sharpness and uniform bounds for the wave propagator
# from experiments import sobolev_experiments

# coherent molecules
from experiments import molecule_experiments
