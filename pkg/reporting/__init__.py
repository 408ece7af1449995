# Run records and the files written from them
