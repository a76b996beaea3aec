"""Modified WER, CTM confidence filtering and significance testing."""
