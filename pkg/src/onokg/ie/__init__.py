"""Information extraction: preprocessing, tagging, decoding, linking,
relation extraction, and KG enrichment."""
