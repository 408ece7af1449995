# Core library: genomes, problems, selection, stopping and the generation loop
