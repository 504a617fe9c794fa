"""Exact computations with quadratic dioperads, resolutions and polyvector fields."""
