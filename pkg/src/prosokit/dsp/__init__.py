"""Signal processing: audio buffers and the short-time Fourier transform."""
