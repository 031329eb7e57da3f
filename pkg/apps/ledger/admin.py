from django.contrib import admin

from .models import FileRecord, MasterRegistration, SlotTableVersion


@admin.register(SlotTableVersion)
class SlotTableVersionAdmin(admin.ModelAdmin):
    list_display = ("id", "channel", "version", "created_at")
    list_filter = ("channel",)


@admin.register(MasterRegistration)
class MasterRegistrationAdmin(admin.ModelAdmin):
    list_display = ("id", "channel", "organization", "node", "bandwidth", "registered_at")
    list_filter = ("channel", "organization")


@admin.register(FileRecord)
class FileRecordAdmin(admin.ModelAdmin):
    list_display = ("fid", "channel", "owner", "original_length", "stripe_count", "tokens", "created_at")
    list_filter = ("channel",)
    search_fields = ("fid", "owner")
    readonly_fields = ("tree_text",)
