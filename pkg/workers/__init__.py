# Workers module for parallel runs
