# bt-bounds - exact verification of p-adic group bounds
