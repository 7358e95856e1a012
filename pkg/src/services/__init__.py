"""Services layer: ring model, protocol, validation and reporting."""
