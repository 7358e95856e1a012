"""Core layer: errors, domain models and the spin-state toolkit."""
