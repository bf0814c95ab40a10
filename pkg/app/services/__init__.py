"""Analysis services: algebra, fields, automata, dynamics, oracles and the command pipeline."""
