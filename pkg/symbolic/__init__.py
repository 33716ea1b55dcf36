"""Expression trees, evaluation, conjugation and symbolic derivatives."""
