# Package data for xxz-correlators (numerical defaults).
