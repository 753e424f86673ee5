"""Values produced by the independent oracle scripts in scripts/ and frozen here."""

# scripts/oracle_bernoulli_lyapunov.py --n 1000000 --runs 32 --seed 20240601
BERNOULLI_LAMBDA1 = 0.5541352781770921
BERNOULLI_LAMBDA1_STDERR = 1.60002111348661e-05

# scripts/oracle_iid_gaps.py --n 100000 --seeds 32
IID_H = (0.6515972627252397, 0.5967756685868645, -0.5319868008847829)
IID_GAPS = (0.05482159413837533, 1.1287624694716472)
IID_GAPS_STDERR = (0.0001948809848901643, 0.00036309773822057234)
