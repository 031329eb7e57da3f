# apps package
